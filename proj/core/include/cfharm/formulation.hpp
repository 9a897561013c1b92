#ifndef CFHARM_FORMULATION_HPP_
#define CFHARM_FORMULATION_HPP_

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "cfharm/scm.hpp"

namespace cfharm {

enum class FormulationId { kDBS, kIC, kMC0, kCC0, kMC, kCC, kCCATE, kCCATEC, kHARM, kHARMC };

enum class Aggregation { kCumulative, kMax };
enum class Transform { kIdentity, kIndicator, kClip };
// Which per-state quantity the constraint is built on.
enum class BaseQuantity { kConstraint, kCcate, kHarm };
enum class ThresholdKind { kZero, kDefaultPolicy };

// One row of the constraint-formulation matrix.
struct Formulation {
  FormulationId id;
  std::string_view name;
  InitRegime regime;
  Aggregation aggregation;
  Transform transform;
  BaseQuantity base;
  ThresholdKind threshold;

  // Indicator targets under the max operator are discounted probabilities;
  // their critic uses a sigmoid head and cross-entropy.
  bool chance() const {
    return transform == Transform::kIndicator && aggregation == Aggregation::kMax;
  }
  bool needs_counterfactual() const { return base != BaseQuantity::kConstraint; }
  // Monotone, maps 0 to 0.
  double apply(double v) const;
};

inline constexpr double kIcClipCap = 1.0;

const Formulation& formulation(FormulationId id);
// Throws std::invalid_argument("unknown formulation: ...").
const Formulation& parse_formulation(std::string_view name);
std::span<const Formulation> all_formulations();

// Per-state inputs a formulation may draw on; spans may be empty when the
// formulation does not need them.
struct FormulationInputs {
  std::span<const double> g;      // raw constraint g(s_t)
  std::span<const double> harm;   // harm base h_t
  std::span<const double> ccate;  // c_t
};

// Per-state constraint targets before aggregation: the formulation's base
// quantity passed through its transform.
std::vector<double> formulation_target(const Formulation& form,
                                       const FormulationInputs& in);

// Episode-level aggregate of per-state targets: sum_t gamma^t v_t or
// max_t gamma^t v_t. gamma in (0, 1].
double aggregate(const Formulation& form, std::span<const double> values,
                 double gamma);

}  // namespace cfharm

#endif  // CFHARM_FORMULATION_HPP_
