#include "cfharm/envs.hpp"

#include "cfharm/grid.hpp"
#include "cfharm/rover.hpp"
#include "cfharm/trailer.hpp"
#include "cfharm/wall.hpp"

namespace cfharm {

std::shared_ptr<const Environment> make_environment(std::string_view name,
                                                    const std::string& grid_path) {
  if (name == "rover") return std::make_shared<RoverEnv>();
  if (name == "wall") return std::make_shared<WallEnv>();
  if (name == "trailer") {
    auto grid = std::make_shared<OccupancyGrid>(
        grid_path.empty() ? OccupancyGrid::parse(default_parking_lot_text())
                          : OccupancyGrid::load(grid_path));
    return std::make_shared<TrailerEnv>(std::move(grid));
  }
  throw std::invalid_argument("unknown environment: " + std::string(name));
}

}  // namespace cfharm
