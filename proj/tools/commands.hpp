#ifndef CFHARM_TOOLS_COMMANDS_HPP_
#define CFHARM_TOOLS_COMMANDS_HPP_

#include <string>
#include <vector>

namespace cfharm::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kRuntime = 2;
inline constexpr int kNumeric = 3;

// Optional numeric flags are "unset" when negative.
struct TrainArgs {
  std::string config;
  std::string from_manifest;
  std::vector<std::string> sets;
  std::string env;
  std::string formulation;
  long updates = -1;
  long envs = -1;
  long seed = -1;
  bool allow_regime_override = false;
  std::string out;
  bool force = false;
  int log_every = 50;
};

struct EvalArgs {
  std::string checkpoint;
  std::string policy;  // "checkpoint" (default with --checkpoint), "mu" or "reckless"
  std::string env;
  std::string grid;
  long n_states = 2000;
  long seed = 1;
  std::string regime = "wide";
  double gamma = 0.99;
  std::string shield = "none";
  long shield_samples = 32;
  long shield_steps = -1;
  double shield_threshold = 0.0;
  std::string critic;  // "model" or "rollout"; empty picks by policy
  std::string from_manifest;
  std::string out;
  bool force = false;
};

struct BaselineArgs {
  std::string env = "rover";
  std::string grid;
  long n_states = 2000;
  long seed = 1;
  std::string regime = "wide";
  double gamma = 0.99;
  std::string from_manifest;
  std::string out;
  bool force = false;
};

struct PlotArgs {
  std::string dir;
  std::string out;
  int window = 20;
};

int run_train(const TrainArgs& args);
int run_eval(const EvalArgs& args);
int run_baseline(const BaselineArgs& args);
int run_plot(const PlotArgs& args);

}  // namespace cfharm::cli

#endif  // CFHARM_TOOLS_COMMANDS_HPP_
