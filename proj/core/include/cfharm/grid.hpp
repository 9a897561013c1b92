#ifndef CFHARM_GRID_HPP_
#define CFHARM_GRID_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "cfharm/rover.hpp"  // Vec2

namespace cfharm {

// Connected group of parking-target cells.
struct ParkingSpot {
  Vec2 center;
  double heading = 0.0;  // long axis, defined modulo pi
  double length = 0.0;
  double width = 0.0;
};

struct RayScan {
  std::vector<double> distances;
  std::vector<double> relative_speeds;
};

// Static occupancy grid. Cell (ix, iy) covers
// [ix*cell, (ix+1)*cell) x [iy*cell, (iy+1)*cell); iy = 0 is the bottom row.
// Everything outside the grid counts as occupied.
//
// Text format: header "W H cell_size", then H rows of W characters, first row
// on top. '#' occupied, '.' free, 'P' free parking-target cell.
class OccupancyGrid {
 public:
  static OccupancyGrid parse(std::string_view text);
  static OccupancyGrid load(const std::string& path);

  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size() const { return cell_; }
  bool occupied(int ix, int iy) const;
  bool inside(Vec2 p) const;
  const std::vector<ParkingSpot>& spots() const { return spots_; }

  // Signed distance to the boundary of the occupied set: positive
  // penetration depth inside, negative clearance outside, clearance clipped
  // at -cap.
  double signed_distance(Vec2 p, double cap) const;

  // Grid-exact distance along one ray to the first occupied cell, clipped at
  // max_range. Throws when `origin` is outside the grid.
  double cast(Vec2 origin, double angle, double max_range) const;

  // n_rays evenly spaced rays starting at `heading`. For a static grid the
  // relative speed of a hit point is minus the agent velocity projected on
  // the ray; rays without a hit report 0.
  RayScan raycast(Vec2 origin, double heading, int n_rays, double max_range,
                  Vec2 agent_velocity) const;

  std::string to_text() const;

 private:
  int index(int ix, int iy) const { return iy * width_ + ix; }
  void build_fields();
  double distance_to_cells(Vec2 p, double bound, bool want_occupied) const;

  int width_ = 0;
  int height_ = 0;
  double cell_ = 1.0;
  std::vector<char> cells_;       // '#', '.', 'P'
  std::vector<double> to_occ_;    // from cell centre to nearest occupied cell
  std::vector<double> to_free_;   // from cell centre to nearest free cell
  std::vector<ParkingSpot> spots_;
};

// The shipped parking lot: four bays along the top wall and an open
// manoeuvring area with two pillars.
std::string default_parking_lot_text();

}  // namespace cfharm

#endif  // CFHARM_GRID_HPP_
