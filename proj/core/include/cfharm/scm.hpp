#ifndef CFHARM_SCM_HPP_
#define CFHARM_SCM_HPP_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cfharm/common.hpp"

namespace cfharm {

// Physical state of one environment instance. The layout of `x` is defined by
// each environment; per-episode hidden parameters (friction, trailer
// wheelbase, target spot) live in `x` as well so that the state alone
// determines the transition.
struct EnvState {
  std::vector<double> x;
  int step = 0;
  bool done = false;

  bool operator==(const EnvState&) const = default;
};

using Action = std::vector<double>;
using Observation = std::vector<double>;

// Raw exogenous draws consumed by one transition (dynamics then observation),
// stored before any state-dependent scaling so they can be replayed under a
// counterfactual state.
struct NoiseRecord {
  std::vector<double> draws;

  bool operator==(const NoiseRecord&) const = default;
};

struct Transition {
  EnvState next;
  Observation obs;
  double reward = 0.0;
  double g = 0.0;  // constraint value at `next`
  bool goal = false;
};

enum class InitRegime { kFeasible, kWide };

std::string_view to_string(InitRegime regime);
InitRegime parse_init_regime(std::string_view name);

// Structural causal model s' = f(s, a, xi). Implementations are immutable and
// may be shared across threads.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string_view name() const = 0;
  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual int obs_dim() const = 0;
  virtual int noise_dim() const = 0;
  virtual int horizon() const = 0;
  virtual double dt() const = 0;

  // Deterministic structural equation. Clamping of actions and state limits
  // happens here.
  virtual Transition transition(const EnvState& state, const Action& action,
                                const NoiseRecord& noise) const = 0;

  // Draws the exogenous variables for one step. Draws never depend on state.
  virtual NoiseRecord draw_noise(Rng& rng) const = 0;

  // Observation of a freshly reset state (uses its own draws from `rng`).
  virtual Observation observe_initial(const EnvState& state, Rng& rng) const = 0;

  virtual double constraint(const EnvState& state) const = 0;
  virtual bool at_goal(const EnvState& state) const = 0;
  virtual Action default_action(const EnvState& state) const = 0;
  virtual EnvState sample_initial(InitRegime regime, Rng& rng) const = 0;

  // Number of leading observation entries that are not lidar features (used
  // by the shared encoder). Environments without lidar return obs_dim().
  virtual int state_feature_dim() const { return obs_dim(); }
};

// Samples xi from `rng`, applies f, and records xi.
struct RecordedStep {
  Transition transition;
  NoiseRecord noise;
};

RecordedStep step_recorded(const Environment& env, const EnvState& state,
                           const Action& action, Rng& rng);

// Re-applies f with a recorded xi. Bit-exact with the original step when
// state and action match the recording.
Transition replay_step(const Environment& env, const EnvState& state,
                       const Action& action, const NoiseRecord& noise);

// Batched stochastic or deterministic policy acting on observations (columns
// of `obs`) and, for hand-designed controllers, on the true states.
class BatchPolicy {
 public:
  virtual ~BatchPolicy() = default;
  // Writes one action per column into `actions` and its log-density (0 for
  // deterministic policies) into `log_probs`.
  virtual void act(std::span<const EnvState> states, const Matrix& obs,
                   Rng& rng, Matrix& actions, Vector& log_probs) = 0;
};

// The environment's hand-designed default controller mu.
class DefaultPolicy final : public BatchPolicy {
 public:
  explicit DefaultPolicy(const Environment& env) : env_(env) {}
  void act(std::span<const EnvState> states, const Matrix& obs, Rng& rng,
           Matrix& actions, Vector& log_probs) override;

 private:
  const Environment& env_;
};

// Storage for E environments x M steps. Flat index is env * steps + t.
struct TrajectoryBatch {
  int envs = 0;
  int steps = 0;
  int obs_dim = 0;
  int action_dim = 0;

  std::vector<EnvState> states;       // s_t
  std::vector<EnvState> next_states;  // s_{t+1} before any reset
  Matrix obs;                         // obs_dim x (E*M), observation of s_t
  Matrix next_obs;                    // observation of s_{t+1}
  Matrix actions;                     // action_dim x (E*M), raw sampled
  Vector log_probs;
  Vector rewards;
  Vector g;       // g(s_t)
  Vector next_g;  // g(s_{t+1})
  std::vector<std::uint8_t> dones;  // s_{t+1} ended the episode
  std::vector<std::uint8_t> goals;  // s_{t+1} reached the goal
  std::vector<NoiseRecord> noises;

  int index(int env, int t) const { return env * steps + t; }
  int size() const { return envs * steps; }

  bool operator==(const TrajectoryBatch& other) const;
};

// Summary of an episode that finished inside a rollout.
struct EpisodeSummary {
  double max_g = 0.0;
  double total_reward = 0.0;
  bool success = false;  // goal reached with max_g <= 0
  int length = 0;
};

// E persistent environment instances with their own noise streams.
class VectorEnv {
 public:
  VectorEnv(const Environment& env, int num_envs, InitRegime regime,
            std::uint64_t seed);

  const Environment& env() const { return env_; }
  int size() const { return static_cast<int>(states_.size()); }
  InitRegime regime() const { return regime_; }

  const std::vector<EnvState>& states() const { return states_; }
  const std::vector<Observation>& observations() const { return obs_; }

  // Runs `steps` transitions on every instance, resetting finished episodes.
  TrajectoryBatch rollout(BatchPolicy& policy, int steps, Rng& policy_rng);

  // Episodes completed during the last rollout.
  const std::vector<EpisodeSummary>& finished() const { return finished_; }

 private:
  void reset(int i);

  const Environment& env_;
  InitRegime regime_;
  std::vector<EnvState> states_;
  std::vector<Observation> obs_;
  std::vector<Rng> rngs_;
  std::vector<EpisodeSummary> running_;
  std::vector<EpisodeSummary> finished_;
};

// Rebuilds a batch from its first states, resets, actions and noise records.
TrajectoryBatch replay_batch(const Environment& env,
                             const TrajectoryBatch& recorded);

Matrix observations_to_matrix(std::span<const Observation> obs, int obs_dim);

}  // namespace cfharm

#endif  // CFHARM_SCM_HPP_
