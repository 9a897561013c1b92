#ifndef CFHARM_TOOLS_SVG_HPP_
#define CFHARM_TOOLS_SVG_HPP_

#include <string>
#include <vector>

namespace cfharm::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
  bool steps = false;  // draw as a right-continuous step function
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

// Minimal line chart; non-finite points are skipped.
std::string render_svg(const Chart& chart);

}  // namespace cfharm::cli

#endif  // CFHARM_TOOLS_SVG_HPP_
