#ifndef CFHARM_ENVS_HPP_
#define CFHARM_ENVS_HPP_

#include <memory>
#include <string>
#include <string_view>

#include "cfharm/scm.hpp"

namespace cfharm {

// "rover", "trailer" (grid_path empty: built-in parking lot) or "wall".
// Throws std::invalid_argument for other names.
std::shared_ptr<const Environment> make_environment(std::string_view name,
                                                    const std::string& grid_path = "");

}  // namespace cfharm

#endif  // CFHARM_ENVS_HPP_
