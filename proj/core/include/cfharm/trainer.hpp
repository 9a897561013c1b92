#ifndef CFHARM_TRAINER_HPP_
#define CFHARM_TRAINER_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cfharm/counterfactual.hpp"
#include "cfharm/estimators.hpp"
#include "cfharm/formulation.hpp"
#include "cfharm/model.hpp"
#include "cfharm/nn.hpp"
#include "cfharm/ppo.hpp"
#include "cfharm/scm.hpp"

namespace cfharm {

struct TrainConfig {
  std::string env = "rover";
  std::string grid_path;  // trailer only; empty means the built-in lot
  std::string formulation = "HARM_C";
  // Formulations fix their initial-state regime; a different one is only
  // accepted with allow_regime_override.
  InitRegime regime = InitRegime::kWide;
  bool allow_regime_override = false;

  int envs = 256;
  int updates = 2000;
  int steps = 24;
  int cf_steps = 5;
  int minibatches = 3;
  int epochs = 5;
  LossConfig loss;
  EstimatorConfig est;
  AdamConfig adam;
  double max_grad = 1.0;
  LagrangeSchedule schedule;
  double lagrange_init = 0.0;
  bool normalize_reward_adv = true;

  std::vector<int> hidden{256, 256};
  std::vector<int> encoder_hidden{256, 256};
  bool use_encoder = false;

  int threshold_rollouts = 256;
  int threshold_refresh = 100;
  int checkpoint_every = 100;
  int selection_window = 100;
  std::uint64_t seed = 1;

  // Defaults for "rover" or "trailer" (schedule, N, encoder).
  static TrainConfig defaults(const std::string& env);
  void validate() const;
  const Formulation& form() const { return parse_formulation(formulation); }
  ModelSpec model_spec(const Environment& env) const;
};

struct UpdateMetrics {
  long update = 0;
  double mean_reward = 0.0;
  int episodes = 0;
  int violations = 0;
  int successes = 0;
  double violation_prob = 0.0;  // NaN when no episode finished
  double success_rate = 0.0;
  double mean_harm = 0.0;
  double mean_constraint = 0.0;
  double threshold = 0.0;
  double w = 0.0;
  double lagrange_lr = 0.0;
  LossTerms loss;  // averaged over minibatches
  double grad_norm = 0.0;
  double seconds = 0.0;
};

// Per-transition training targets for one batch.
struct BatchTargets {
  Vector reward_adv;  // raw GAE
  Vector reward_return;
  Vector cost_pi;     // segment TD(lambda)-max of g
  Vector cost_mu;     // counterfactual inference (empty without CF)
  Vector harm;        // per-state harm base (empty unless HARM*)
  Vector ccate;       // per-state c_t (empty unless CCATE*)
  Vector constraint;      // target of the formulation critic
  Vector constraint_adv;  // target minus critic (GAE for cumulative forms)
  std::vector<int> windows;
};

class Trainer {
 public:
  explicit Trainer(TrainConfig cfg);
  Trainer(std::shared_ptr<const Environment> env, TrainConfig cfg);

  // One rollout + target computation + PPO epochs + multiplier step.
  UpdateMetrics update();

  BatchTargets compute_targets(const TrajectoryBatch& batch) const;

  const TrainConfig& config() const { return cfg_; }
  const Environment& env() const { return *env_; }
  std::shared_ptr<const Environment> env_ptr() const { return env_; }
  ActorCritic& model() { return model_; }
  const ActorCritic& model() const { return model_; }
  const Adam& optimizer() const { return adam_; }
  Adam& optimizer() { return adam_; }
  double multiplier() const { return w_; }
  void set_multiplier(double w) { w_ = w; }
  double threshold() const { return threshold_; }
  long updates_done() const { return update_; }
  const TrajectoryBatch& last_batch() const { return last_batch_; }
  const Rng& policy_rng() const { return policy_rng_; }

 private:
  Vector critic_next_values(const TrajectoryBatch& batch, Head head) const;

  TrainConfig cfg_;
  const Formulation* form_;
  std::shared_ptr<const Environment> env_;
  ActorCritic model_;
  Adam adam_;
  VectorEnv venv_;
  Rng policy_rng_;
  Rng shuffle_rng_;
  double w_ = 0.0;
  double threshold_ = 0.0;
  long update_ = 0;
  TrajectoryBatch last_batch_;
};

struct CheckpointRecord {
  long update = 0;
  double violation_prob = 0.0;
  double success_rate = 0.0;
};

// Index of the checkpoint to keep: the last one unless its violation
// probability is worse than the best seen, in which case the least-violating
// one, ties broken by success rate.
std::size_t select_checkpoint(const std::vector<CheckpointRecord>& records);

}  // namespace cfharm

#endif  // CFHARM_TRAINER_HPP_
