#ifndef CFHARM_ESTIMATORS_HPP_
#define CFHARM_ESTIMATORS_HPP_

#include <optional>
#include <span>
#include <vector>

namespace cfharm {

struct EstimatorConfig {
  double gamma = 0.99;
  double lambda = 0.95;
  // The harm-return recursion can blend the critic with either sign. "+"
  // (the convex blend used by the constraint-value recursion) is the
  // default; the "-" form is kept for comparison.
  bool harm_return_minus = false;

  void validate() const;
};

// Backward max-operator TD(lambda) over one episode segment s_0..s_{T-1}:
//
//   V(t) = max{ base[t], gamma * (lambda * V(t+1) + (1 - lambda) * next[t]) }
//
// where next[t] is the critic at s_{t+1} and V(T) is `tail`. Without a tail
// the segment has no successor and V(T-1) = base[T-1].
std::vector<double> tdl_max(std::span<const double> base,
                            std::span<const double> next_values,
                            std::optional<double> tail,
                            const EstimatorConfig& cfg);

// Maximum-harm return: the same recursion over harm bases h_t with the harm
// critic as bootstrap (sign of the critic blend per cfg.harm_return_minus).
std::vector<double> harm_return(std::span<const double> harm_base,
                                std::span<const double> next_values,
                                std::optional<double> tail,
                                const EstimatorConfig& cfg);

// Per-state harm base ReLU(v_pi - ReLU(v_mu)).
double harm_base(double v_pi, double v_mu);

// GAE(lambda) over one segment. `values` has T+1 entries; the last is the
// bootstrap (0 after a terminal state).
std::vector<double> gae(std::span<const double> rewards,
                        std::span<const double> values, double gamma,
                        double lambda);

// gamma (1 - lambda) / (1 - gamma lambda): the contraction factor of the
// max-operator TD(lambda) estimator.
double contraction_eta(double gamma, double lambda);

}  // namespace cfharm

#endif  // CFHARM_ESTIMATORS_HPP_
