#ifndef CFHARM_TOOLS_CONFIG_HPP_
#define CFHARM_TOOLS_CONFIG_HPP_

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "cfharm/trainer.hpp"

namespace cfharm::cli {

// Training settings as read from an INI file: one section per module
// ([train], [env], [ppo], [estimator], [lagrange], [model]).
struct RunConfig {
  TrainConfig train;
  int baseline_states = 1000;  // mu rollouts behind the dashed baseline
};

// section -> key -> value, all as strings.
using Sections = std::map<std::string, std::map<std::string, std::string>>;

Sections read_ini(const std::string& path);

// "section.key=value"; throws std::invalid_argument on malformed input.
void apply_override(Sections& s, const std::string& assignment);

// Starts from the environment defaults and applies every entry. Unknown
// keys and unparsable values throw std::invalid_argument.
RunConfig build_config(const Sections& s);

// Every setting with its effective value, in a form build_config reads back
// to the same RunConfig.
Sections snapshot(const RunConfig& c);

nlohmann::json to_json(const Sections& s);
Sections from_json(const nlohmann::json& j);

}  // namespace cfharm::cli

#endif  // CFHARM_TOOLS_CONFIG_HPP_
