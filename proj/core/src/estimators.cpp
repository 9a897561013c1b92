#include "cfharm/estimators.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace cfharm {

void EstimatorConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must be in (0, 1)");
  if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must be in [0, 1)");
}

namespace {

std::vector<double> max_recursion(std::span<const double> base,
                                  std::span<const double> next,
                                  std::optional<double> tail, double gamma,
                                  double lambda, double critic_sign) {
  if (base.size() != next.size()) {
    throw std::invalid_argument("max recursion: " + std::to_string(base.size()) +
                                " bases vs " + std::to_string(next.size()) +
                                " bootstrap values");
  }
  const std::size_t T = base.size();
  std::vector<double> out(T);
  if (T == 0) return out;
  std::size_t t = T - 1;
  double ahead;
  if (tail) {
    ahead = *tail;
    out[t] = std::max(base[t], gamma * (lambda * ahead + critic_sign * (1.0 - lambda) * next[t]));
  } else {
    out[t] = base[t];
  }
  ahead = out[t];
  while (t-- > 0) {
    out[t] = std::max(base[t], gamma * (lambda * ahead + critic_sign * (1.0 - lambda) * next[t]));
    ahead = out[t];
  }
  return out;
}

}  // namespace

std::vector<double> tdl_max(std::span<const double> base,
                            std::span<const double> next_values,
                            std::optional<double> tail,
                            const EstimatorConfig& cfg) {
  return max_recursion(base, next_values, tail, cfg.gamma, cfg.lambda, 1.0);
}

std::vector<double> harm_return(std::span<const double> harm_base,
                                std::span<const double> next_values,
                                std::optional<double> tail,
                                const EstimatorConfig& cfg) {
  return max_recursion(harm_base, next_values, tail, cfg.gamma, cfg.lambda,
                       cfg.harm_return_minus ? -1.0 : 1.0);
}

double harm_base(double v_pi, double v_mu) {
  return std::max(0.0, v_pi - std::max(0.0, v_mu));
}

std::vector<double> gae(std::span<const double> rewards,
                        std::span<const double> values, double gamma,
                        double lambda) {
  if (values.size() != rewards.size() + 1) {
    throw std::invalid_argument("gae: need T+1 values for T rewards");
  }
  const std::size_t T = rewards.size();
  std::vector<double> adv(T);
  double running = 0.0;
  for (std::size_t k = T; k-- > 0;) {
    const double delta = rewards[k] + gamma * values[k + 1] - values[k];
    running = delta + gamma * lambda * running;
    adv[k] = running;
  }
  return adv;
}

double contraction_eta(double gamma, double lambda) {
  if (!(gamma >= 0.0 && gamma < 1.0) || !(lambda >= 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("contraction_eta: gamma and lambda must be in [0, 1)");
  }
  return gamma * (1.0 - lambda) / (1.0 - gamma * lambda);
}

}  // namespace cfharm
