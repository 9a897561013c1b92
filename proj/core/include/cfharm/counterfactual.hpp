#ifndef CFHARM_COUNTERFACTUAL_HPP_
#define CFHARM_COUNTERFACTUAL_HPP_

#include <functional>
#include <span>
#include <vector>

#include "cfharm/estimators.hpp"
#include "cfharm/formulation.hpp"
#include "cfharm/scm.hpp"

namespace cfharm {

// mu's branch from a recorded state under the recorded noise.
// states[0] is the branch point; obs[k] and g[k + 1] belong to states[k + 1].
struct CounterfactualPath {
  std::vector<EnvState> states;
  std::vector<Observation> obs;
  std::vector<double> g;

  int steps() const { return static_cast<int>(states.size()) - 1; }
};

// Runs up to n_steps of s' = f(s, mu(s), xi) with xi taken from `noises` in
// order. Stops early when the branch itself terminates. Throws
// std::invalid_argument when fewer than n_steps records are supplied.
CounterfactualPath simulate_counterfactual(const Environment& env,
                                           const EnvState& start,
                                           std::span<const NoiseRecord> noises,
                                           int n_steps);

// Critic evaluated on a batch of observation columns.
using ValueFn = std::function<Vector(const Matrix& obs)>;

// Max-operator TD(lambda) value of the first state of an n-step window:
// g_path holds g(s_t..s_{t+n-1}) (n entries) and critic_next the critic at
// s_{t+1..t+n}; the critic at s_{t+n} also seeds the recursion.
double window_value(std::span<const double> g_path,
                    std::span<const double> critic_next,
                    const EstimatorConfig& cfg);

// N-step counterfactual inference for one branch point.
double counterfactual_inference(const Environment& env, const EnvState& start,
                                std::span<const NoiseRecord> noises, int n_steps,
                                const ValueFn& v_mu, const EstimatorConfig& cfg);

std::vector<double> harm_targets(std::span<const double> v_pi,
                                 std::span<const double> v_mu);
std::vector<double> ccate_targets(std::span<const double> v_pi,
                                  std::span<const double> v_mu_critic);

// Inference windows for every stored transition of a rollout batch: at most
// N steps, cut at episode ends and at the end of the batch.
std::vector<int> window_lengths(const TrajectoryBatch& batch, int n_steps);

// All counterfactual branches of a batch, flattened so the critic can be
// evaluated in one pass.
struct CounterfactualBatch {
  std::vector<int> lengths;  // per batch index
  std::vector<int> offsets;  // first column of each branch
  Matrix obs;                // observations of branch states 1..n
  std::vector<double> g;     // g of branch states 1..n, aligned with obs
};

CounterfactualBatch simulate_counterfactual_batch(const Environment& env,
                                                  const TrajectoryBatch& batch,
                                                  int n_steps);

// Per batch index: V of the counterfactual branch given V_g^mu at its
// states 1..n (one value per column of cf.obs).
std::vector<double> counterfactual_values(const CounterfactualBatch& cf,
                                          const TrajectoryBatch& batch,
                                          std::span<const double> critic_mu,
                                          const EstimatorConfig& cfg);

// Per batch index: the learner's windowed value over the same window lengths,
// given V_g^pi at s_{t+1} for every index.
std::vector<double> learner_window_values(const TrajectoryBatch& batch,
                                          std::span<const int> lengths,
                                          std::span<const double> critic_pi_next,
                                          const EstimatorConfig& cfg);

// Exact discounted worst outcome max_k gamma^k g[k].
double discounted_max(std::span<const double> g, double gamma);

// Harm along a complete learner episode s_0..s_T driven by noise_plan,
// with mu's branch from every state simulated to its own episode end (no
// critics). noise_plan must cover the environment horizon.
struct EpisodeHarm {
  std::vector<double> per_state;  // h_t for t = 0..T-1
  double episode = 0.0;           // max_t gamma^t h_t
};

EpisodeHarm episode_harm(const Environment& env,
                         std::span<const EnvState> learner_states,
                         std::span<const NoiseRecord> noise_plan, double gamma);

// Mean of ReLU over per-rollout outcomes.
double mean_relu(std::span<const double> outcomes);

// Monte-Carlo estimate of E[ReLU(aggregate of mu's episode)] from the
// formulation's initial distribution, with fresh noise per rollout.
double estimate_default_threshold(const Environment& env, const Formulation& form,
                                  Rng& rng, int n_rollouts, double gamma);

}  // namespace cfharm

#endif  // CFHARM_COUNTERFACTUAL_HPP_
