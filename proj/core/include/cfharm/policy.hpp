#ifndef CFHARM_POLICY_HPP_
#define CFHARM_POLICY_HPP_

#include "cfharm/model.hpp"
#include "cfharm/scm.hpp"

namespace cfharm {

// Samples a ~ N(mean(obs), exp(log_std)^2) from the actor of `model`.
class GaussianPolicy final : public BatchPolicy {
 public:
  explicit GaussianPolicy(const ActorCritic& model) : model_(model) {}
  void act(std::span<const EnvState> states, const Matrix& obs, Rng& rng,
           Matrix& actions, Vector& log_probs) override;

 private:
  const ActorCritic& model_;
};

// Log-density of every action column under the current actor.
Vector policy_log_probs(const ActorCritic& model, const Matrix& obs,
                        const Matrix& actions);

}  // namespace cfharm

#endif  // CFHARM_POLICY_HPP_
