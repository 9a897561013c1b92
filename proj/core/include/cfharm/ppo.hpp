#ifndef CFHARM_PPO_HPP_
#define CFHARM_PPO_HPP_

#include <array>

#include "cfharm/model.hpp"

namespace cfharm {

struct LossConfig {
  double clip = 0.2;
  double entropy_coef = 0.01;
  // Clip the ratio against the combined (reward minus weighted constraint)
  // advantage; otherwise only the reward part is clipped.
  bool clip_combined = true;
  double critic_coef = 0.5;
};

struct Minibatch {
  Matrix obs;
  Matrix actions;
  Vector old_log_probs;
  Vector reward_adv;      // normalized
  Vector constraint_adv;  // target minus critic, raw units
  std::array<Vector, kNumCritics> targets;
  std::array<bool, kNumCritics> trained{};

  int size() const { return static_cast<int>(obs.cols()); }
};

struct LossTerms {
  double total = 0.0;
  double policy = 0.0;
  double entropy = 0.0;
  std::array<double, kNumCritics> critic{};
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

// Per-sample policy objective (to be maximized) for ratio r:
// clipped-PPO on A_r - w * A_c.
double surrogate_objective(double ratio, double reward_adv, double constraint_adv,
                           double w, const LossConfig& cfg);

double mse(const Vector& pred, const Vector& target);
// Binary cross-entropy of sigmoid(logit) against targets in [0, 1].
double bce_with_logits(const Vector& logits, const Vector& target);

// Actor loss + entropy bonus + critic_coef * sum of critic losses. When
// `grad` is non-null it receives d(total)/d(params) (overwritten).
LossTerms ppo_loss(const ActorCritic& model, const Minibatch& mb, double w,
                   const LossConfig& cfg, Vector* grad);

// Multiplier learning rate: base_lr until `hold`, then linear to final_lr at
// `ramp_end`, both expressed for `reference_total` updates and rescaled to
// the run's length.
struct LagrangeSchedule {
  double base_lr = 1e-3;
  double hold = 250;
  double final_lr = 1.0;
  double ramp_end = 15000;
  double reference_total = 15000;

  double rate(long update, long total_updates) const;

  static LagrangeSchedule rover() { return {}; }
  static LagrangeSchedule trailer() { return {1e-3, 1000, 0.1, 15000, 15000}; }
};

// Projected ascent step max(0, w + lr * (mean_target - threshold)).
double lagrange_update(double w, double mean_target, double threshold, double lr);

}  // namespace cfharm

#endif  // CFHARM_PPO_HPP_
