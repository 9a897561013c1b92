#ifndef CFHARM_EVAL_HPP_
#define CFHARM_EVAL_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "cfharm/scm.hpp"

namespace cfharm {

struct EvalConfig {
  int n_states = 2000;
  std::uint64_t seed = 1;
  InitRegime regime = InitRegime::kWide;
  double gamma = 0.99;
};

// One evaluated initial state: its sampled s0, first observation and the
// dynamics noise for the full horizon, shared by every policy compared on it.
struct EvalCase {
  EnvState s0;
  Observation obs0;
  std::vector<NoiseRecord> noise_plan;
};

EvalCase make_eval_case(const Environment& env, InitRegime regime,
                        std::uint64_t seed, int index);

struct Episode {
  std::vector<EnvState> states;  // s_0..s_T
  double max_g = 0.0;
  bool goal = false;
};

// mu from s0 under a fixed noise realization.
Episode default_episode(const Environment& env, const EvalCase& c);

// true iff mu keeps max_t g(s_t) <= 0 for the whole episode.
bool kernel_membership(const Environment& env, const EvalCase& c);

// Runs `policy` on many cases in lockstep (one batched policy call per step).
// Action randomness comes from `action_rng` only.
std::vector<Episode> run_episodes(const Environment& env, BatchPolicy& policy,
                                  std::span<const EvalCase> cases, Rng& action_rng);

struct EvalRow {
  int index = 0;
  bool member = false;  // default-safe
  double learner_max_g = 0.0;
  double default_max_g = 0.0;
  double learner_harm = 0.0;
  bool goal = false;
  int length = 0;

  bool learner_safe() const { return learner_max_g <= 0.0; }
  bool success() const { return goal && learner_safe() && member; }
};

struct ViabilityStats {
  int n_states = 0;
  int default_safe = 0;
  int learner_safe = 0;
  int recalled = 0;     // learner safe and default safe
  int discovered = 0;   // learner safe and default unsafe
  int successes = 0;
  int harmed = 0;
  double recall = 0.0;  // NaN without default-safe states
  double dr = 0.0;
  double success = 0.0;  // NaN without kernel members
  double p_harm = 0.0;
};

// Counting over rows; throws std::invalid_argument on an empty set.
ViabilityStats summarize(std::span<const EvalRow> rows);

struct ViabilityReport {
  std::vector<EvalRow> rows;
  ViabilityStats stats;
};

ViabilityReport evaluate(const Environment& env, BatchPolicy& policy,
                         const EvalConfig& cfg);

// Empirical CDF as an exact step function over the distinct values.
struct CdfCurve {
  std::vector<double> x;
  std::vector<double> f;  // fraction of samples <= x[i]

  double at(double v) const;
};

CdfCurve cdf(std::span<const double> values);

struct BaselineStats {
  int n_states = 0;
  int violations = 0;
  double violation_prob = 0.0;
  std::vector<double> max_g;
};

// mu's outcomes from the evaluation initial states (same cases as evaluate).
BaselineStats baseline(const Environment& env, const EvalConfig& cfg);

void write_rows_csv(std::ostream& os, std::span<const EvalRow> rows);
void write_cdf(std::ostream& os, const CdfCurve& curve);

}  // namespace cfharm

#endif  // CFHARM_EVAL_HPP_
