#ifndef CFHARM_SHIELD_HPP_
#define CFHARM_SHIELD_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "cfharm/estimators.hpp"
#include "cfharm/model.hpp"
#include "cfharm/scm.hpp"

namespace cfharm {

// Constraint critic over a batch of states and their observation columns.
// Learned critics read only the observations.
using CriticFn = std::function<Vector(std::span<const EnvState>, const Matrix&)>;

CriticFn model_critic(const ActorCritic& model, Head head);

// Critic computed by simulating `policy` from the true state with all noise
// draws at zero until the episode ends. Meant for toy environments.
CriticFn rollout_critic(const Environment& env,
                        std::function<Action(const EnvState&)> policy, double gamma);

enum class ShieldMode { kNone, kExplicit, kImplicit };
ShieldMode parse_shield_mode(std::string_view name);

struct ShieldConfig {
  ShieldMode mode = ShieldMode::kExplicit;
  int samples = 32;
  int n_steps = 5;
  double threshold = 0.0;
  std::vector<double> radii{0.25, 0.5, 1.0, 2.0};
  int directions = 8;  // used for 2-D action spaces

  void validate() const;
};

// Monte-Carlo estimate of the expected counterfactual harm of taking
// `action` in `state` and following the learner for the remaining N - 1
// steps, against mu from the same state under the same noise.
class HarmDiscriminator {
 public:
  HarmDiscriminator(const Environment& env, BatchPolicy& learner, CriticFn v_pi,
                    CriticFn v_mu, EstimatorConfig est, int n_steps, int samples);

  // All randomness (noise and learner actions) is derived from `seed`, so
  // calls sharing a seed use common random numbers.
  double operator()(const EnvState& state, const Action& action, std::uint64_t seed) const;

  // Harm of one branch under given noise records (at least n_steps of them).
  double branch_harm(const EnvState& state, const Action& action,
                     std::span<const NoiseRecord> noises, Rng& policy_rng) const;

  int samples() const { return samples_; }

 private:
  const Environment& env_;
  BatchPolicy& learner_;
  CriticFn v_pi_;
  CriticFn v_mu_;
  EstimatorConfig est_;
  int n_steps_;
  int samples_;
};

struct ShieldDecision {
  Action action;
  double value = 0.0;      // discriminator value of the returned action
  bool replaced = false;   // action differs from the proposal
  bool feasible = true;    // implicit: some candidate met the threshold
  std::vector<Action> candidates;  // implicit: evaluated candidates, by norm
  std::vector<double> candidate_values;
};

ShieldDecision explicit_shield(const Environment& env, const EnvState& state,
                               const Action& proposed, const HarmDiscriminator& d,
                               const ShieldConfig& cfg, std::uint64_t seed);

// Perturbation offsets sorted by norm, starting with zero.
std::vector<Action> shield_offsets(int action_dim, const ShieldConfig& cfg);

// Evaluates every candidate (for auditing) and returns the smallest
// feasible perturbation, or the least harmful one when none is feasible.
ShieldDecision implicit_shield(const EnvState& state, const Action& proposed,
                               const HarmDiscriminator& d, const ShieldConfig& cfg,
                               std::uint64_t seed);

struct ShieldStats {
  long decisions = 0;
  long replaced = 0;
  long infeasible = 0;
};

// Wraps a learner so every action passes through a shield.
class ShieldedPolicy final : public BatchPolicy {
 public:
  ShieldedPolicy(const Environment& env, BatchPolicy& learner,
                 const HarmDiscriminator& d, ShieldConfig cfg);
  void act(std::span<const EnvState> states, const Matrix& obs, Rng& rng,
           Matrix& actions, Vector& log_probs) override;
  const ShieldStats& stats() const { return stats_; }
  // Optional hook receiving every decision (used by audits).
  std::function<void(const EnvState&, const Action&, const ShieldDecision&)> on_decision;

 private:
  const Environment& env_;
  BatchPolicy& learner_;
  const HarmDiscriminator& d_;
  ShieldConfig cfg_;
  ShieldStats stats_;
};

}  // namespace cfharm

#endif  // CFHARM_SHIELD_HPP_
