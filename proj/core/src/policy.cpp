#include "cfharm/policy.hpp"

namespace cfharm {

void GaussianPolicy::act(std::span<const EnvState>, const Matrix& obs, Rng& rng,
                         Matrix& actions, Vector& log_probs) {
  const Matrix mean = model_.mean(obs);
  const auto log_std = model_.log_std();
  const int d = static_cast<int>(mean.rows());
  actions.resize(d, mean.cols());
  log_probs.resize(mean.cols());
  for (Eigen::Index j = 0; j < mean.cols(); ++j) {
    for (int k = 0; k < d; ++k) {
      actions(k, j) = mean(k, j) + std::exp(log_std[k]) * standard_normal(rng);
    }
    log_probs[j] = gaussian_log_prob(&mean(0, j), log_std.data(), &actions(0, j), d);
  }
}

Vector policy_log_probs(const ActorCritic& model, const Matrix& obs,
                        const Matrix& actions) {
  const Matrix mean = model.mean(obs);
  const int d = static_cast<int>(mean.rows());
  Vector out(mean.cols());
  for (Eigen::Index j = 0; j < mean.cols(); ++j) {
    out[j] = gaussian_log_prob(&mean(0, j), model.log_std().data(), &actions(0, j), d);
  }
  return out;
}

}  // namespace cfharm
