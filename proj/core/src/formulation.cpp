#include "cfharm/formulation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cfharm {

namespace {

using A = Aggregation;
using B = BaseQuantity;
using T = Transform;
using Th = ThresholdKind;
constexpr InitRegime kFeas = InitRegime::kFeasible;
constexpr InitRegime kWide = InitRegime::kWide;

constexpr std::array<Formulation, 10> kFormulations{{
    {FormulationId::kDBS, "DBS", kFeas, A::kCumulative, T::kIndicator, B::kConstraint, Th::kZero},
    {FormulationId::kIC, "IC", kFeas, A::kCumulative, T::kClip, B::kConstraint, Th::kZero},
    {FormulationId::kMC0, "MC_0", kFeas, A::kMax, T::kIdentity, B::kConstraint, Th::kZero},
    {FormulationId::kCC0, "CC_0", kFeas, A::kMax, T::kIndicator, B::kConstraint, Th::kZero},
    {FormulationId::kMC, "MC", kWide, A::kMax, T::kIdentity, B::kConstraint, Th::kDefaultPolicy},
    {FormulationId::kCC, "CC", kWide, A::kMax, T::kIndicator, B::kConstraint, Th::kDefaultPolicy},
    {FormulationId::kCCATE, "CCATE", kWide, A::kMax, T::kIdentity, B::kCcate, Th::kZero},
    {FormulationId::kCCATEC, "CCATE_C", kWide, A::kMax, T::kIndicator, B::kCcate, Th::kZero},
    {FormulationId::kHARM, "HARM", kWide, A::kMax, T::kIdentity, B::kHarm, Th::kZero},
    {FormulationId::kHARMC, "HARM_C", kWide, A::kMax, T::kIndicator, B::kHarm, Th::kZero},
}};

}  // namespace

double Formulation::apply(double v) const {
  switch (transform) {
    case T::kIdentity:
      return v;
    case T::kIndicator:
      return v > 0.0 ? 1.0 : 0.0;
    case T::kClip:
      return std::clamp(v, 0.0, kIcClipCap);
  }
  return v;
}

const Formulation& formulation(FormulationId id) {
  return kFormulations[static_cast<std::size_t>(id)];
}

const Formulation& parse_formulation(std::string_view name) {
  for (const Formulation& f : kFormulations) {
    if (f.name == name) return f;
  }
  throw std::invalid_argument("unknown formulation: " + std::string(name));
}

std::span<const Formulation> all_formulations() { return kFormulations; }

std::vector<double> formulation_target(const Formulation& form,
                                       const FormulationInputs& in) {
  std::span<const double> src;
  switch (form.base) {
    case B::kConstraint:
      src = in.g;
      break;
    case B::kHarm:
      src = in.harm;
      break;
    case B::kCcate:
      src = in.ccate;
      break;
  }
  if (src.empty() && !(in.g.empty() && in.harm.empty() && in.ccate.empty())) {
    throw std::invalid_argument(std::string(form.name) +
                                ": required per-state quantity missing");
  }
  std::vector<double> out(src.size());
  std::transform(src.begin(), src.end(), out.begin(),
                 [&](double v) { return form.apply(v); });
  return out;
}

double aggregate(const Formulation& form, std::span<const double> values,
                 double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("aggregate: gamma in (0, 1]");
  if (values.empty()) return 0.0;
  double discount = 1.0;
  if (form.aggregation == A::kCumulative) {
    double sum = 0.0;
    for (double v : values) {
      sum += discount * v;
      discount *= gamma;
    }
    return sum;
  }
  double best = values[0];
  for (double v : values) {
    best = std::max(best, discount * v);
    discount *= gamma;
  }
  return best;
}

}  // namespace cfharm
