#include "cfharm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace cfharm {

namespace {

// Distance from p to the axis-aligned square centred at c with half side h.
double point_square_distance(Vec2 p, Vec2 c, double h) {
  const double dx = std::max(std::abs(p.x - c.x) - h, 0.0);
  const double dy = std::max(std::abs(p.y - c.y) - h, 0.0);
  return std::hypot(dx, dy);
}

}  // namespace

OccupancyGrid OccupancyGrid::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  OccupancyGrid g;
  std::string header;
  if (!std::getline(in, header)) throw std::invalid_argument("grid: empty input");
  std::istringstream hs(header);
  if (!(hs >> g.width_ >> g.height_ >> g.cell_) || g.width_ < 3 ||
      g.height_ < 3 || !(g.cell_ > 0.0)) {
    throw std::invalid_argument("grid: bad header '" + header + "'");
  }
  g.cells_.assign(static_cast<std::size_t>(g.width_) * g.height_, '#');
  std::string line;
  for (int row = 0; row < g.height_; ++row) {
    if (!std::getline(in, line)) {
      throw std::invalid_argument("grid: expected " + std::to_string(g.height_) +
                                  " rows, got " + std::to_string(row));
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (static_cast<int>(line.size()) != g.width_) {
      throw std::invalid_argument("grid: row " + std::to_string(row) +
                                  " has width " + std::to_string(line.size()));
    }
    const int iy = g.height_ - 1 - row;
    for (int ix = 0; ix < g.width_; ++ix) {
      const char c = line[ix];
      if (c != '#' && c != '.' && c != 'P') {
        throw std::invalid_argument(std::string("grid: bad cell character '") + c + "'");
      }
      g.cells_[g.index(ix, iy)] = c;
    }
  }
  for (int ix = 0; ix < g.width_; ++ix) {
    if (!g.occupied(ix, 0) || !g.occupied(ix, g.height_ - 1)) {
      throw std::invalid_argument("grid: boundary must be occupied");
    }
  }
  for (int iy = 0; iy < g.height_; ++iy) {
    if (!g.occupied(0, iy) || !g.occupied(g.width_ - 1, iy)) {
      throw std::invalid_argument("grid: boundary must be occupied");
    }
  }
  g.build_fields();
  return g;
}

OccupancyGrid OccupancyGrid::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("grid: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

bool OccupancyGrid::occupied(int ix, int iy) const {
  if (ix < 0 || iy < 0 || ix >= width_ || iy >= height_) return true;
  return cells_[index(ix, iy)] == '#';
}

bool OccupancyGrid::inside(Vec2 p) const {
  return p.x >= 0.0 && p.y >= 0.0 && p.x < width_ * cell_ && p.y < height_ * cell_;
}

void OccupancyGrid::build_fields() {
  const double h = 0.5 * cell_;
  std::vector<Vec2> occ, free;
  for (int iy = 0; iy < height_; ++iy) {
    for (int ix = 0; ix < width_; ++ix) {
      const Vec2 c{(ix + 0.5) * cell_, (iy + 0.5) * cell_};
      (occupied(ix, iy) ? occ : free).push_back(c);
    }
  }
  to_occ_.assign(cells_.size(), 0.0);
  to_free_.assign(cells_.size(), 0.0);
  for (int iy = 0; iy < height_; ++iy) {
    for (int ix = 0; ix < width_; ++ix) {
      const Vec2 c{(ix + 0.5) * cell_, (iy + 0.5) * cell_};
      const auto& others = occupied(ix, iy) ? free : occ;
      double best = std::numeric_limits<double>::infinity();
      for (const Vec2& o : others) best = std::min(best, point_square_distance(c, o, h));
      (occupied(ix, iy) ? to_free_ : to_occ_)[index(ix, iy)] = best;
    }
  }

  // Parking spots: 4-connected components of 'P' cells.
  spots_.clear();
  std::vector<char> seen(cells_.size(), 0);
  for (int iy = 0; iy < height_; ++iy) {
    for (int ix = 0; ix < width_; ++ix) {
      if (cells_[index(ix, iy)] != 'P' || seen[index(ix, iy)]) continue;
      std::vector<std::pair<int, int>> stack{{ix, iy}};
      seen[index(ix, iy)] = 1;
      int count = 0, min_x = ix, max_x = ix, min_y = iy, max_y = iy;
      double sx = 0.0, sy = 0.0;
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        ++count;
        sx += cx + 0.5;
        sy += cy + 0.5;
        min_x = std::min(min_x, cx);
        max_x = std::max(max_x, cx);
        min_y = std::min(min_y, cy);
        max_y = std::max(max_y, cy);
        const int nbr[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (const auto& d : nbr) {
          const int nx = cx + d[0], ny = cy + d[1];
          if (nx < 0 || ny < 0 || nx >= width_ || ny >= height_) continue;
          if (cells_[index(nx, ny)] == 'P' && !seen[index(nx, ny)]) {
            seen[index(nx, ny)] = 1;
            stack.emplace_back(nx, ny);
          }
        }
      }
      ParkingSpot spot;
      spot.center = {sx / count * cell_, sy / count * cell_};
      const double w = (max_x - min_x + 1) * cell_;
      const double l = (max_y - min_y + 1) * cell_;
      spot.heading = l >= w ? std::numbers::pi / 2.0 : 0.0;
      spot.length = std::max(w, l);
      spot.width = std::min(w, l);
      spots_.push_back(spot);
    }
  }
}

double OccupancyGrid::distance_to_cells(Vec2 p, double bound,
                                        bool want_occupied) const {
  const double h = 0.5 * cell_;
  const int x0 = std::max(0, static_cast<int>(std::floor((p.x - bound) / cell_)));
  const int x1 = std::min(width_ - 1, static_cast<int>(std::floor((p.x + bound) / cell_)));
  const int y0 = std::max(0, static_cast<int>(std::floor((p.y - bound) / cell_)));
  const int y1 = std::min(height_ - 1, static_cast<int>(std::floor((p.y + bound) / cell_)));
  double best = bound;
  for (int iy = y0; iy <= y1; ++iy) {
    for (int ix = x0; ix <= x1; ++ix) {
      if (occupied(ix, iy) != want_occupied) continue;
      best = std::min(best, point_square_distance(
                                p, {(ix + 0.5) * cell_, (iy + 0.5) * cell_}, h));
    }
  }
  return best;
}

double OccupancyGrid::signed_distance(Vec2 p, double cap) const {
  const double h = 0.5 * cell_;
  const double slack = h * std::numbers::sqrt2;
  const int ix = static_cast<int>(std::floor(p.x / cell_));
  const int iy = static_cast<int>(std::floor(p.y / cell_));
  if (!inside(p) || occupied(ix, iy)) {
    const int cx = std::clamp(ix, 0, width_ - 1);
    const int cy = std::clamp(iy, 0, height_ - 1);
    const Vec2 c{(cx + 0.5) * cell_, (cy + 0.5) * cell_};
    const double bound =
        to_free_[index(cx, cy)] + std::hypot(p.x - c.x, p.y - c.y) + slack;
    return distance_to_cells(p, bound, false);
  }
  const double centre = to_occ_[index(ix, iy)];
  if (centre - slack >= cap) return -cap;
  return -std::min(distance_to_cells(p, centre + slack, true), cap);
}

double OccupancyGrid::cast(Vec2 o, double angle, double max_range) const {
  if (!inside(o)) throw std::out_of_range("raycast origin outside the grid");
  const double dx = std::cos(angle), dy = std::sin(angle);
  int ix = static_cast<int>(std::floor(o.x / cell_));
  int iy = static_cast<int>(std::floor(o.y / cell_));
  if (occupied(ix, iy)) return 0.0;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const int step_x = dx > 0.0 ? 1 : -1;
  const int step_y = dy > 0.0 ? 1 : -1;
  double t_max_x = dx != 0.0 ? ((ix + (step_x > 0 ? 1 : 0)) * cell_ - o.x) / dx : kInf;
  double t_max_y = dy != 0.0 ? ((iy + (step_y > 0 ? 1 : 0)) * cell_ - o.y) / dy : kInf;
  const double t_dx = dx != 0.0 ? cell_ / std::abs(dx) : kInf;
  const double t_dy = dy != 0.0 ? cell_ / std::abs(dy) : kInf;
  while (true) {
    double t;
    if (t_max_x < t_max_y) {
      t = t_max_x;
      ix += step_x;
      t_max_x += t_dx;
    } else {
      t = t_max_y;
      iy += step_y;
      t_max_y += t_dy;
    }
    if (t >= max_range) return max_range;
    if (occupied(ix, iy)) return t;
  }
}

RayScan OccupancyGrid::raycast(Vec2 origin, double heading, int n_rays,
                               double max_range, Vec2 vel) const {
  RayScan scan;
  scan.distances.resize(n_rays);
  scan.relative_speeds.resize(n_rays);
  for (int k = 0; k < n_rays; ++k) {
    const double a = heading + 2.0 * std::numbers::pi * k / n_rays;
    const double d = cast(origin, a, max_range);
    scan.distances[k] = d;
    scan.relative_speeds[k] =
        d < max_range ? -(vel.x * std::cos(a) + vel.y * std::sin(a)) : 0.0;
  }
  return scan;
}

std::string OccupancyGrid::to_text() const {
  std::ostringstream out;
  out << width_ << ' ' << height_ << ' ' << cell_ << '\n';
  for (int row = 0; row < height_; ++row) {
    const int iy = height_ - 1 - row;
    for (int ix = 0; ix < width_; ++ix) out << cells_[index(ix, iy)];
    out << '\n';
  }
  return out.str();
}

std::string default_parking_lot_text() {
  constexpr int kW = 100, kH = 64;
  std::vector<std::string> rows(kH, std::string(kW, '.'));
  auto set = [&](int ix, int iy, char c) { rows[kH - 1 - iy][ix] = c; };
  for (int ix = 0; ix < kW; ++ix) {
    set(ix, 0, '#');
    set(ix, kH - 1, '#');
  }
  for (int iy = 0; iy < kH; ++iy) {
    set(0, iy, '#');
    set(kW - 1, iy, '#');
  }
  // Wall block holding four bays, 4.5 m wide and 11.5 m deep.
  for (int iy = 40; iy < kH - 1; ++iy) {
    for (int ix = 1; ix < kW - 1; ++ix) set(ix, iy, '#');
  }
  for (int bay = 0; bay < 4; ++bay) {
    const int x0 = 10 + bay * 22;
    for (int iy = 40; iy < kH - 1; ++iy) {
      for (int ix = x0; ix < x0 + 9; ++ix) {
        const bool target = ix > x0 && ix < x0 + 8 && iy >= 44 && iy < 61;
        set(ix, iy, target ? 'P' : '.');
      }
    }
  }
  // Pillars in the manoeuvring area.
  for (int iy = 8; iy < 12; ++iy) {
    for (int ix = 30; ix < 34; ++ix) set(ix, iy, '#');
    for (int ix = 66; ix < 70; ++ix) set(ix, iy, '#');
  }
  std::string text = std::to_string(kW) + " " + std::to_string(kH) + " 0.5\n";
  for (const auto& r : rows) text += r + '\n';
  return text;
}

}  // namespace cfharm
