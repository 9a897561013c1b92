#include "cfharm/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <ostream>

#include "cfharm/counterfactual.hpp"

namespace cfharm {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double ratio(int num, int den) {
  return den ? static_cast<double>(num) / den : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

EvalCase make_eval_case(const Environment& env, InitRegime regime,
                        std::uint64_t seed, int index) {
  Rng rng = derive_rng(seed, static_cast<std::uint64_t>(index), 0xe7a1);
  EvalCase c;
  c.s0 = env.sample_initial(regime, rng);
  c.obs0 = env.observe_initial(c.s0, rng);
  c.noise_plan.reserve(env.horizon());
  for (int k = 0; k < env.horizon(); ++k) c.noise_plan.push_back(env.draw_noise(rng));
  return c;
}

Episode default_episode(const Environment& env, const EvalCase& c) {
  Episode ep;
  ep.states.push_back(c.s0);
  ep.max_g = env.constraint(c.s0);
  while (!ep.states.back().done) {
    const EnvState& s = ep.states.back();
    Transition tr = replay_step(env, s, env.default_action(s), c.noise_plan.at(s.step));
    ep.max_g = std::max(ep.max_g, tr.g);
    ep.goal = tr.goal;
    ep.states.push_back(std::move(tr.next));
  }
  return ep;
}

bool kernel_membership(const Environment& env, const EvalCase& c) {
  return default_episode(env, c).max_g <= 0.0;
}

std::vector<Episode> run_episodes(const Environment& env, BatchPolicy& policy,
                                  std::span<const EvalCase> cases, Rng& action_rng) {
  const int n = static_cast<int>(cases.size());
  std::vector<Episode> eps(n);
  std::vector<Observation> obs(n);
  for (int i = 0; i < n; ++i) {
    eps[i].states.push_back(cases[i].s0);
    eps[i].max_g = env.constraint(cases[i].s0);
    obs[i] = cases[i].obs0;
  }
  std::vector<int> active;
  std::vector<EnvState> states;
  std::vector<Observation> active_obs;
  Matrix actions;
  Vector log_probs;
  while (true) {
    active.clear();
    for (int i = 0; i < n; ++i) {
      if (!eps[i].states.back().done) active.push_back(i);
    }
    if (active.empty()) break;
    states.clear();
    active_obs.clear();
    for (int i : active) {
      states.push_back(eps[i].states.back());
      active_obs.push_back(obs[i]);
    }
    policy.act(states, observations_to_matrix(active_obs, env.obs_dim()), action_rng,
               actions, log_probs);
    for (std::size_t k = 0; k < active.size(); ++k) {
      const int i = active[k];
      const EnvState& s = eps[i].states.back();
      const Action a(actions.col(k).data(), actions.col(k).data() + actions.rows());
      Transition tr = replay_step(env, s, a, cases[i].noise_plan.at(s.step));
      eps[i].max_g = std::max(eps[i].max_g, tr.g);
      eps[i].goal = tr.goal;
      obs[i] = std::move(tr.obs);
      eps[i].states.push_back(std::move(tr.next));
    }
  }
  return eps;
}

ViabilityStats summarize(std::span<const EvalRow> rows) {
  if (rows.empty()) throw std::invalid_argument("summarize: no evaluated states");
  ViabilityStats s;
  s.n_states = static_cast<int>(rows.size());
  for (const EvalRow& r : rows) {
    if (r.member) ++s.default_safe;
    if (r.learner_safe()) {
      ++s.learner_safe;
      if (r.member) {
        ++s.recalled;
      } else {
        ++s.discovered;
      }
    }
    if (r.success()) ++s.successes;
    if (r.learner_harm > 0.0) ++s.harmed;
  }
  s.recall = ratio(s.recalled, s.default_safe);
  s.dr = ratio(s.discovered, s.n_states);
  s.success = ratio(s.successes, s.default_safe);
  s.p_harm = ratio(s.harmed, s.n_states);
  return s;
}

ViabilityReport evaluate(const Environment& env, BatchPolicy& policy,
                         const EvalConfig& cfg) {
  if (cfg.n_states < 1) throw std::invalid_argument("evaluate: n_states must be >= 1");
  std::vector<EvalCase> cases;
  cases.reserve(cfg.n_states);
  for (int i = 0; i < cfg.n_states; ++i) cases.push_back(make_eval_case(env, cfg.regime, cfg.seed, i));

  Rng action_rng = derive_rng(cfg.seed, 0, 0xac71);
  const std::vector<Episode> learner = run_episodes(env, policy, cases, action_rng);

  ViabilityReport report;
  report.rows.resize(cfg.n_states);
  for (int i = 0; i < cfg.n_states; ++i) {
    const Episode mu = default_episode(env, cases[i]);
    EvalRow& r = report.rows[i];
    r.index = i;
    r.default_max_g = mu.max_g;
    r.member = mu.max_g <= 0.0;
    r.learner_max_g = learner[i].max_g;
    r.goal = learner[i].goal;
    r.length = static_cast<int>(learner[i].states.size()) - 1;
    r.learner_harm = episode_harm(env, learner[i].states, cases[i].noise_plan, cfg.gamma).episode;
  }
  report.stats = summarize(report.rows);
  return report;
}

double CdfCurve::at(double v) const {
  const auto it = std::upper_bound(x.begin(), x.end(), v);
  if (it == x.begin()) return 0.0;
  return f[static_cast<std::size_t>(it - x.begin()) - 1];
}

CdfCurve cdf(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("cdf: no values");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  CdfCurve c;
  const double n = static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i + 1 < v.size() && v[i + 1] == v[i]) continue;
    c.x.push_back(v[i]);
    c.f.push_back(static_cast<double>(i + 1) / n);
  }
  return c;
}

BaselineStats baseline(const Environment& env, const EvalConfig& cfg) {
  if (cfg.n_states < 1) throw std::invalid_argument("baseline: n_states must be >= 1");
  BaselineStats b;
  b.n_states = cfg.n_states;
  b.max_g.reserve(cfg.n_states);
  for (int i = 0; i < cfg.n_states; ++i) {
    const double m = default_episode(env, make_eval_case(env, cfg.regime, cfg.seed, i)).max_g;
    b.max_g.push_back(m);
    if (m > 0.0) ++b.violations;
  }
  b.violation_prob = static_cast<double>(b.violations) / b.n_states;
  return b;
}

void write_rows_csv(std::ostream& os, std::span<const EvalRow> rows) {
  os << "index,member,learner_max_g,default_max_g,learner_harm,goal,length,learner_safe,success\n";
  for (const EvalRow& r : rows) {
    os << r.index << ',' << r.member << ',' << fmt(r.learner_max_g) << ','
       << fmt(r.default_max_g) << ',' << fmt(r.learner_harm) << ',' << r.goal << ','
       << r.length << ',' << r.learner_safe() << ',' << r.success() << '\n';
  }
}

void write_cdf(std::ostream& os, const CdfCurve& curve) {
  for (std::size_t i = 0; i < curve.x.size(); ++i) {
    os << fmt(curve.x[i]) << ' ' << fmt(curve.f[i]) << '\n';
  }
}

}  // namespace cfharm
