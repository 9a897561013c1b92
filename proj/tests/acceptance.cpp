// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--runs DIR] [--cli PATH] [--source DIR] [--only N]
//
// Criteria 6-8 read desk-scale training artifacts under --runs (written by
// tools/desk_runs.sh); criterion 11 drives the CLI binary.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cfharm/counterfactual.hpp"
#include "cfharm/envs.hpp"
#include "cfharm/eval.hpp"
#include "cfharm/policy.hpp"
#include "cfharm/ppo.hpp"
#include "cfharm/shield.hpp"
#include "cfharm/trainer.hpp"
#include "cfharm/wall.hpp"

namespace fs = std::filesystem;
using namespace cfharm;

namespace {

struct Args {
  fs::path runs = "results/desk";
  std::string cli;
  fs::path source = ".";
  int only = 0;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Fixed point on random deterministic chains.

struct Chain {
  std::vector<int> next;  // -1 marks a terminal state
  std::vector<double> g;
};

Chain random_chain(Rng& rng, int n) {
  Chain c;
  c.next.resize(n);
  c.g.resize(n);
  for (int s = 0; s < n; ++s) {
    c.g[s] = uniform(rng, -1.0, 1.0);
    c.next[s] = uniform(rng, 0.0, 1.0) < 0.15 ? -1
                                              : static_cast<int>(uniform(rng, 0.0, n - 1e-9));
  }
  return c;
}

// Brute force: max_k gamma^k g(s_k) along the trajectory, enumerated far
// enough that gamma^k is negligible.
std::vector<double> chain_oracle(const Chain& c, double gamma) {
  const int n = static_cast<int>(c.g.size());
  std::vector<double> v(n);
  for (int s0 = 0; s0 < n; ++s0) {
    double best = c.g[s0];
    double disc = 1.0;
    int s = s0;
    for (int k = 1; k < 6000 && c.next[s] >= 0; ++k) {
      s = c.next[s];
      disc *= gamma;
      best = std::max(best, disc * c.g[s]);
    }
    v[s0] = best;
  }
  return v;
}

// One application of the bootstrapped operator: from every state, the
// max-TD(lambda) value of the trajectory segment of (up to) `horizon` steps
// with V as the critic at successors and tail.
std::vector<double> chain_operator(const Chain& c, const std::vector<double>& V,
                                   const EstimatorConfig& cfg, int horizon) {
  const int n = static_cast<int>(c.g.size());
  std::vector<double> out(n);
  std::vector<double> base, nxt;
  for (int s0 = 0; s0 < n; ++s0) {
    base.clear();
    nxt.clear();
    int s = s0;
    std::optional<double> tail;
    for (int k = 0; k < horizon; ++k) {
      base.push_back(c.g[s]);
      const int ns = c.next[s];
      nxt.push_back(ns >= 0 ? V[ns] : 0.0);
      if (ns < 0) break;
      s = ns;
      if (k == horizon - 1) tail = V[s];
    }
    out[s0] = tdl_max(base, nxt, tail, cfg).front();
  }
  return out;
}

Outcome criterion_fixed_point() {
  const auto t0 = Clock::now();
  EstimatorConfig cfg;
  cfg.gamma = 0.99;
  cfg.lambda = 0.95;
  Rng rng(20240101);
  int worst_iters = 0;
  double worst_err = 0.0;
  bool ok = true;
  for (int rep = 0; rep < 100; ++rep) {
    const Chain c = random_chain(rng, 10);
    const std::vector<double> oracle = chain_oracle(c, cfg.gamma);
    std::vector<double> V(10, 0.0);
    int it = 0;
    double err = 0.0;
    for (; it < 500; ++it) {
      V = chain_operator(c, V, cfg, 10);
      err = 0.0;
      for (int s = 0; s < 10; ++s) err = std::max(err, std::abs(V[s] - oracle[s]));
      if (err <= 1e-10) break;
    }
    worst_iters = std::max(worst_iters, it + 1);
    worst_err = std::max(worst_err, err);
    if (err > 1e-10) ok = false;
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 5.0, "max error " + fmt("%.2e", worst_err) + ", max iterations " +
                                std::to_string(worst_iters) + ", " + fmt("%.2f", secs) + " s"};
}

// ---------------------------------------------------------------------------
// 2. Contraction.
//
// The lambda-operator on random chains, unrolled far enough that the
// bootstrap tail carries weight (gamma lambda)^H below 1e-40.

Outcome criterion_contraction() {
  const auto t0 = Clock::now();
  EstimatorConfig cfg;
  const double eta = contraction_eta(cfg.gamma, cfg.lambda);
  Rng rng(7);
  double worst = -1e300;
  double worst_ratio = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const Chain c = random_chain(rng, 10);
    std::vector<double> v1(10), v2(10);
    const double scale = uniform(rng, 0.01, 5.0);
    for (double& x : v1) x = scale * standard_normal(rng);
    for (double& x : v2) x = scale * standard_normal(rng);
    const std::vector<double> m1 = chain_operator(c, v1, cfg, 1000);
    const std::vector<double> m2 = chain_operator(c, v2, cfg, 1000);
    double lhs = 0.0, rhs = 0.0;
    for (int s = 0; s < 10; ++s) {
      lhs = std::max(lhs, std::abs(m1[s] - m2[s]));
      rhs = std::max(rhs, std::abs(v1[s] - v2[s]));
    }
    worst = std::max(worst, lhs - eta * rhs);
    worst_ratio = std::max(worst_ratio, lhs / rhs);
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 5.0,
          "eta " + fmt("%.5f", eta) + ", largest observed ratio " + fmt("%.5f", worst_ratio) +
              ", max(lhs - eta*rhs) " + fmt("%.3e", worst) + ", " + fmt("%.2f", secs) + " s"};
}

// ---------------------------------------------------------------------------
// 3. Twin-network replay.

void put_bytes(std::string& out, const void* p, std::size_t n) {
  out.append(static_cast<const char*>(p), n);
}

void put_state(std::string& out, const EnvState& s) {
  put_bytes(out, s.x.data(), s.x.size() * sizeof(double));
  put_bytes(out, &s.step, sizeof(s.step));
  const char d = s.done;
  put_bytes(out, &d, 1);
}

std::string batch_bytes(const TrajectoryBatch& b) {
  std::string out;
  for (const EnvState& s : b.states) put_state(out, s);
  for (const EnvState& s : b.next_states) put_state(out, s);
  for (const Matrix* m : {&b.obs, &b.next_obs, &b.actions}) {
    put_bytes(out, m->data(), static_cast<std::size_t>(m->size()) * sizeof(double));
  }
  for (const Vector* v : {&b.log_probs, &b.rewards, &b.g, &b.next_g}) {
    put_bytes(out, v->data(), static_cast<std::size_t>(v->size()) * sizeof(double));
  }
  put_bytes(out, b.dones.data(), b.dones.size());
  put_bytes(out, b.goals.data(), b.goals.size());
  for (const NoiseRecord& n : b.noises) {
    put_bytes(out, n.draws.data(), n.draws.size() * sizeof(double));
  }
  return out;
}

Outcome criterion_twin_replay() {
  std::string detail;
  bool ok = true;
  for (const char* name : {"rover", "trailer", "wall"}) {
    auto env = make_environment(name);
    // Random Gaussian actions from an untrained policy exercise more of the
    // dynamics than mu alone.
    ModelSpec spec;
    spec.obs_dim = env->obs_dim();
    spec.action_dim = env->action_dim();
    spec.hidden = {32, 32};
    spec.log_std_init = 0.5;
    ActorCritic model(spec);
    Rng init(3);
    model.initialize(init);
    GaussianPolicy pi(model);
    VectorEnv venv(*env, 10, InitRegime::kWide, 11);
    Rng rng(5);
    const TrajectoryBatch b = venv.rollout(pi, 100, rng);  // 1000 transitions

    int exact = 0;
    for (int i = 0; i < b.size(); ++i) {
      const Action a(b.actions.col(i).data(), b.actions.col(i).data() + b.action_dim);
      const Transition tr = replay_step(*env, b.states[i], a, b.noises[i]);
      const Observation o(b.next_obs.col(i).data(), b.next_obs.col(i).data() + b.obs_dim);
      if (tr.next == b.next_states[i] && tr.obs == o &&
          std::bit_cast<std::uint64_t>(tr.reward) == std::bit_cast<std::uint64_t>(b.rewards[i]) &&
          std::bit_cast<std::uint64_t>(tr.g) == std::bit_cast<std::uint64_t>(b.next_g[i])) {
        ++exact;
      }
    }
    const bool bytes_equal = batch_bytes(replay_batch(*env, b)) == batch_bytes(b);
    ok = ok && exact == b.size() && bytes_equal;
    detail += std::string(name) + " " + std::to_string(exact) + "/" + std::to_string(b.size()) +
              (bytes_equal ? " batch identical; " : " batch DIFFERS; ");
  }
  return {ok, detail};
}

// ---------------------------------------------------------------------------
// 4. Zero-harm identity.

Outcome criterion_zero_harm() {
  std::string detail;
  bool ok = true;
  for (const char* name : {"rover", "trailer"}) {
    TrainConfig cfg = TrainConfig::defaults(name);
    cfg.formulation = "HARM";
    cfg.hidden = {64, 64};
    cfg.encoder_hidden = {64, 64};
    Trainer trainer(cfg);
    // pi outputs mu's actions; its constraint critic is mu's critic.
    trainer.model().copy_head(Head::kCostMu, Head::kCostPi);
    const Environment& env = trainer.env();
    DefaultPolicy mu(env);

    // Per-state harm targets over complete episodes.
    VectorEnv venv(env, 100, InitRegime::kWide, 404);
    Rng rng(1);
    const TrajectoryBatch b = venv.rollout(mu, env.horizon(), rng);
    const int episodes = static_cast<int>(venv.finished().size());
    const BatchTargets tg = trainer.compute_targets(b);
    long nonzero = 0;
    for (Eigen::Index i = 0; i < tg.harm.size(); ++i) nonzero += tg.harm[i] != 0.0;

    // Episode harm over 100 paired evaluation episodes.
    std::vector<EvalCase> cases;
    for (int i = 0; i < 100; ++i) cases.push_back(make_eval_case(env, InitRegime::kWide, 404, i));
    Rng act(2);
    const std::vector<Episode> eps = run_episodes(env, mu, cases, act);
    long nonzero_ep = 0;
    for (int i = 0; i < 100; ++i) {
      const EpisodeHarm h = episode_harm(env, eps[i].states, cases[i].noise_plan, cfg.est.gamma);
      if (h.episode != 0.0) ++nonzero_ep;
      for (double x : h.per_state) nonzero_ep += x != 0.0;
    }
    ok = ok && nonzero == 0 && nonzero_ep == 0 && episodes >= 100;
    detail += std::string(name) + ": " + std::to_string(tg.harm.size()) + " targets (" +
              std::to_string(episodes) + " episodes), " + std::to_string(nonzero) +
              " nonzero, eval episodes nonzero " + std::to_string(nonzero_ep) + "; ";
  }
  return {ok, detail};
}

// ---------------------------------------------------------------------------
// 5. Gradient check of the full loss.

Outcome criterion_gradient() {
  const auto t0 = Clock::now();
  auto env = make_environment("rover");
  TrainConfig cfg = TrainConfig::defaults("rover");
  cfg.formulation = "HARM_C";
  cfg.hidden = {64, 64};
  cfg.envs = 16;
  cfg.steps = 24;
  Trainer trainer(cfg);
  // A few updates move the policy away from initialization and give real
  // targets and advantages.
  for (int k = 0; k < 3; ++k) trainer.update();
  trainer.set_multiplier(0.8);
  const TrajectoryBatch& b = trainer.last_batch();
  const BatchTargets tg = trainer.compute_targets(b);

  const int B = 96;
  Minibatch mb;
  mb.obs = b.obs.leftCols(B);
  mb.actions = b.actions.leftCols(B);
  // Shifted old log-probabilities put ratios on both sides of the clip range.
  mb.old_log_probs = policy_log_probs(trainer.model(), mb.obs, mb.actions);
  Rng rng(99);
  for (int j = 0; j < B; ++j) mb.old_log_probs[j] += uniform(rng, -0.3, 0.3);
  mb.reward_adv = tg.reward_adv.head(B);
  mb.reward_adv = (mb.reward_adv.array() - mb.reward_adv.mean()) /
                  (std::sqrt((mb.reward_adv.array() - mb.reward_adv.mean()).square().mean()) + 1e-8);
  mb.constraint_adv = tg.constraint_adv.head(B);
  mb.trained = {true, true, true, true};
  mb.targets[0] = tg.reward_return.head(B);
  mb.targets[1] = tg.cost_pi.head(B);
  mb.targets[2] = tg.cost_mu.head(B);
  mb.targets[3] = tg.constraint.head(B);

  ActorCritic model = trainer.model();
  const LossConfig loss;
  const double w = trainer.multiplier();
  Vector grad;
  ppo_loss(model, mb, w, loss, &grad);

  std::vector<Eigen::Index> coords;
  // Always include the log-std entries, the rest at random.
  for (int k = 0; k < model.spec().action_dim; ++k) {
    coords.push_back(static_cast<Eigen::Index>(model.log_std_offset()) + k);
  }
  while (coords.size() < 64) {
    coords.push_back(static_cast<Eigen::Index>(uniform(rng, 0.0, grad.size() - 1e-9)));
  }
  const double eps = 1e-5;
  double worst = 0.0;
  for (Eigen::Index i : coords) {
    const double keep = model.params()[i];
    model.params()[i] = keep + eps;
    const double up = ppo_loss(model, mb, w, loss, nullptr).total;
    model.params()[i] = keep - eps;
    const double down = ppo_loss(model, mb, w, loss, nullptr).total;
    model.params()[i] = keep;
    const double fd = (up - down) / (2 * eps);
    worst = std::max(worst, std::abs(grad[i] - fd) / std::max(1.0, std::abs(grad[i])));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 30.0,
          "64 coordinates, max relative error " + fmt("%.2e", worst) + ", " + fmt("%.2f", secs) +
              " s"};
}

// ---------------------------------------------------------------------------
// 6-8. Desk-scale artifacts.

struct MetricsTail {
  int rows = 0;
  long episodes = 0;
  long violations = 0;
};

MetricsTail read_metrics_tail(const fs::path& csv, int window) {
  std::ifstream in(csv);
  if (!in) throw std::runtime_error("missing " + csv.string());
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) header.push_back(col);
  }
  const auto col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error(csv.string() + ": no column " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ce = col("episodes"), cv = col("violations");
  std::vector<std::pair<long, long>> rows;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string x;
    while (std::getline(ss, x, ',')) f.push_back(x);
    rows.emplace_back(std::stol(f.at(ce)), std::stol(f.at(cv)));
  }
  MetricsTail t;
  t.rows = static_cast<int>(rows.size());
  for (std::size_t i = rows.size() > static_cast<std::size_t>(window) ? rows.size() - window : 0;
       i < rows.size(); ++i) {
    t.episodes += rows[i].first;
    t.violations += rows[i].second;
  }
  return t;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("missing " + p.string());
  return nlohmann::json::parse(in);
}

double median3(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

Outcome criterion_desk_violation(const Args& args) {
  auto env = make_environment("rover");
  const BaselineStats mu = baseline(*env, EvalConfig{2000, 1, InitRegime::kWide, 0.99});
  std::string detail = "mu baseline " + fmt("%.4f", mu.violation_prob) + ";";
  bool ok = true;
  for (int seed = 1; seed <= 3; ++seed) {
    const fs::path dir = args.runs / ("rover_HARM_C_s" + std::to_string(seed));
    const MetricsTail t = read_metrics_tail(dir / "metrics.csv", 100);
    const nlohmann::json manifest = read_json(dir / "manifest.json");
    const auto& c = manifest.at("config");
    const bool settings = t.rows == 2000 && c.at("train").at("envs") == "256" &&
                          c.at("train").at("updates") == "2000";
    const double p = t.episodes ? static_cast<double>(t.violations) / t.episodes : 1.0;
    ok = ok && settings && p <= mu.violation_prob;
    detail += " seed " + std::to_string(seed) + " " + fmt("%.4f", p) + " (" +
              std::to_string(t.episodes) + " episodes" + (settings ? ")" : ", WRONG SETTINGS)");
  }
  return {ok, detail};
}

Outcome criterion_desk_harm(const Args& args) {
  std::vector<double> harm, mc;
  std::string detail;
  for (int seed = 1; seed <= 3; ++seed) {
    for (const char* f : {"HARM_C", "MC"}) {
      const fs::path p = args.runs / ("rover_" + std::string(f) + "_s" + std::to_string(seed)) /
                         "eval" / "summary.json";
      const nlohmann::json s = read_json(p);
      if (s.at("n_states").get<int>() != 2000) throw std::runtime_error(p.string() + ": n_states");
      (std::string(f) == "MC" ? mc : harm).push_back(s.at("p_harm").get<double>());
    }
  }
  const double mh = median3(harm), mm = median3(mc);
  detail = "median P_harm HARM_C " + fmt("%.4f", mh) + " vs MC " + fmt("%.4f", mm) + " (HARM_C";
  for (double h : harm) detail += " " + fmt("%.4f", h);
  detail += "; MC";
  for (double m : mc) detail += " " + fmt("%.4f", m);
  detail += ")";
  return {mh <= mm, detail};
}

double total_seconds(const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) throw std::runtime_error("missing " + csv.string());
  std::string line;
  std::getline(in, line);
  double sum = 0.0;
  while (std::getline(in, line)) sum += std::stod(line.substr(line.find(',') + 1));
  return sum;
}

Outcome criterion_overhead(const Args& args) {
  const fs::path a = args.runs / "timing_HARM";
  const fs::path b = args.runs / "timing_MC_0";
  const nlohmann::json ca = read_json(a / "manifest.json").at("config");
  const nlohmann::json cb = read_json(b / "manifest.json").at("config");
  nlohmann::json sa = ca, sb = cb;
  sa["train"].erase("formulation");
  sb["train"].erase("formulation");
  sa["train"].erase("regime");
  sb["train"].erase("regime");
  sa["train"].erase("allow_regime_override");
  sb["train"].erase("allow_regime_override");
  const bool same = sa == sb;
  const double ta = total_seconds(a / "timing.csv");
  const double tb = total_seconds(b / "timing.csv");
  const double ratio = ta / tb;
  return {same && ratio <= 1.5, "HARM " + fmt("%.1f", ta) + " s, MC_0 " + fmt("%.1f", tb) +
                                    " s, ratio " + fmt("%.3f", ratio) +
                                    (same ? "" : " (settings differ)")};
}

// ---------------------------------------------------------------------------
// 9. Evaluation-harness exactness.

// A scripted environment whose outcomes are known in closed form: the state
// is [kind, t]; kind encodes whether mu and the learner violate and whether
// the learner reaches the goal.
class ScriptedEnv final : public Environment {
 public:
  std::string_view name() const override { return "scripted"; }
  int state_dim() const override { return 2; }
  int action_dim() const override { return 1; }
  int obs_dim() const override { return 1; }
  int noise_dim() const override { return 1; }
  int horizon() const override { return 4; }
  double dt() const override { return 1.0; }

  // kind bits: 1 = mu violates, 2 = learner violates, 4 = learner reaches goal.
  Transition transition(const EnvState& s, const Action& a, const NoiseRecord&) const override {
    Transition tr;
    const int kind = static_cast<int>(s.x[0]);
    const bool learner = a[0] > 0.5;
    const bool violate = learner ? (kind & 2) : (kind & 1);
    tr.next.x = {s.x[0], violate && s.step == 1 ? 1.0 : -1.0};
    tr.next.step = s.step + 1;
    tr.goal = learner && (kind & 4) && tr.next.step == horizon();
    tr.next.done = tr.next.step >= horizon();
    tr.g = constraint(tr.next);
    tr.obs = {s.x[0]};
    return tr;
  }
  NoiseRecord draw_noise(Rng& rng) const override { return {{uniform(rng, 0.0, 1.0)}}; }
  Observation observe_initial(const EnvState& s, Rng&) const override { return {s.x[0]}; }
  double constraint(const EnvState& s) const override { return s.x[1]; }
  bool at_goal(const EnvState&) const override { return false; }
  Action default_action(const EnvState&) const override { return {0.0}; }
  EnvState sample_initial(InitRegime, Rng& rng) const override {
    EnvState s;
    s.x = {static_cast<double>(static_cast<int>(uniform(rng, 0.0, 8.0 - 1e-9))), -1.0};
    return s;
  }
};

class ScriptedLearner final : public BatchPolicy {
 public:
  void act(std::span<const EnvState> states, const Matrix&, Rng&, Matrix& actions,
           Vector& log_probs) override {
    actions.setOnes(1, static_cast<Eigen::Index>(states.size()));
    log_probs.setZero(static_cast<Eigen::Index>(states.size()));
  }
};

Outcome criterion_eval_exactness() {
  const ScriptedEnv env;
  ScriptedLearner learner;
  EvalConfig cfg;
  cfg.n_states = 400;
  cfg.seed = 3;
  const ViabilityReport r = evaluate(env, learner, cfg);

  // Hand count from the kinds alone.
  int safe_mu = 0, recalled = 0, discovered = 0, success = 0, harmed = 0;
  for (int i = 0; i < cfg.n_states; ++i) {
    const int kind = static_cast<int>(make_eval_case(env, cfg.regime, cfg.seed, i).s0.x[0]);
    const bool mu_ok = !(kind & 1), pi_ok = !(kind & 2), goal = kind & 4;
    safe_mu += mu_ok;
    recalled += mu_ok && pi_ok;
    discovered += !mu_ok && pi_ok;
    success += mu_ok && pi_ok && goal;
    // Harm: the learner violates where mu would not.
    harmed += (kind & 2) && !(kind & 1);
  }
  const double recall = static_cast<double>(recalled) / safe_mu;
  const double dr = static_cast<double>(discovered) / cfg.n_states;
  const double succ = static_cast<double>(success) / safe_mu;
  const double ph = static_cast<double>(harmed) / cfg.n_states;
  const ViabilityStats& s = r.stats;
  const bool ok = s.recall == recall && s.dr == dr && s.success == succ && s.p_harm == ph &&
                  s.default_safe == safe_mu;
  return {ok, "Recall " + fmt("%.6f", s.recall) + "/" + fmt("%.6f", recall) + ", DR " +
                  fmt("%.6f", s.dr) + "/" + fmt("%.6f", dr) + ", Success " +
                  fmt("%.6f", s.success) + "/" + fmt("%.6f", succ) + ", P_harm " +
                  fmt("%.6f", s.p_harm) + "/" + fmt("%.6f", ph)};
}

// ---------------------------------------------------------------------------
// 10. Shields on the wall env.

Outcome criterion_shields() {
  const WallEnv env;
  RecklessPolicy reckless(env);
  const CriticFn v_pi = rollout_critic(env, [](const EnvState&) { return Action{1.0}; }, 0.99);
  const CriticFn v_mu =
      rollout_critic(env, [&env](const EnvState& s) { return env.default_action(s); }, 0.99);
  HarmDiscriminator d(env, reckless, v_pi, v_mu, EstimatorConfig{}, 5, 4);

  ShieldConfig ex;
  ex.mode = ShieldMode::kExplicit;
  ShieldedPolicy explicit_policy(env, reckless, d, ex);
  EvalConfig cfg;
  cfg.n_states = 500;
  const ViabilityReport shielded = evaluate(env, explicit_policy, cfg);
  const ViabilityReport raw = evaluate(env, reckless, cfg);
  const int violations = cfg.n_states - shielded.stats.learner_safe;

  ShieldConfig im;
  im.mode = ShieldMode::kImplicit;
  ShieldedPolicy implicit_policy(env, reckless, d, im);
  long audited = 0, worse = 0, mismatch = 0;
  implicit_policy.on_decision = [&](const EnvState&, const Action& proposed,
                                    const ShieldDecision& dec) {
    ++audited;
    if (dec.candidates.empty() || dec.candidates.front() != proposed) {
      ++mismatch;
      return;
    }
    // The returned action must be one of the audited candidates with the
    // recorded value, and never worse than the proposal.
    const auto it = std::find(dec.candidates.begin(), dec.candidates.end(), dec.action);
    if (it == dec.candidates.end() ||
        dec.candidate_values[static_cast<std::size_t>(it - dec.candidates.begin())] != dec.value) {
      ++mismatch;
    }
    if (dec.value > dec.candidate_values.front()) ++worse;
  };
  EvalConfig small;
  small.n_states = 20;
  evaluate(env, implicit_policy, small);
  const bool ok = violations == 0 && raw.stats.learner_safe == 0 && worse == 0 && mismatch == 0 &&
                  audited > 0;
  return {ok, "explicit: " + std::to_string(violations) + " violations in 500 episodes (" +
                  std::to_string(cfg.n_states - raw.stats.learner_safe) +
                  " unshielded); implicit: " + std::to_string(audited) + " decisions audited, " +
                  std::to_string(worse) + " worse than proposal"};
}

// ---------------------------------------------------------------------------
// 11. CLI reruns from manifests.

int run(const std::string& cmd) {
  const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
  return rc;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("missing " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome criterion_determinism(const Args& args) {
  if (args.cli.empty()) return {false, "no --cli binary given"};
  const fs::path tmp = fs::temp_directory_path() / "cfharm_acceptance_rerun";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  const std::string cli = "\"" + args.cli + "\"";
  const std::string cfg = (args.source / "configs" / "rover_harm_c.cfg").string();
  std::string detail;
  bool ok = true;

  const auto check = [&](const std::string& label, const std::string& first,
                         const std::string& rerun, const fs::path& a, const fs::path& b,
                         const std::vector<std::string>& files) {
    const int r1 = run(first);
    const int r2 = run(rerun);
    bool same = r1 == 0 && r2 == 0;
    if (same) {
      for (const std::string& f : files) same = same && slurp(a / f) == slurp(b / f);
    }
    ok = ok && same;
    detail += label + (same ? " identical; " : " DIFFERENT; ");
  };

  check("train metrics.csv",
        cli + " train --config \"" + cfg + "\" --updates 4 --envs 6 --seed 3 " +
            "--set model.hidden=32,32 --out \"" + (tmp / "t1").string() + "\"",
        cli + " train --from-manifest \"" + (tmp / "t1" / "manifest.json").string() +
            "\" --out \"" + (tmp / "t2").string() + "\"",
        tmp / "t1", tmp / "t2", {"metrics.csv"});
  check("eval rows.csv",
        cli + " eval --checkpoint \"" + (tmp / "t1" / "final.ckpt").string() +
            "\" --n-states 40 --seed 7 --out \"" + (tmp / "e1").string() + "\"",
        cli + " eval --from-manifest \"" + (tmp / "e1" / "manifest.json").string() +
            "\" --out \"" + (tmp / "e2").string() + "\"",
        tmp / "e1", tmp / "e2", {"rows.csv", "cdf_harm.txt", "cdf_learner_max_g.txt"});
  fs::remove_all(tmp);
  return {ok, detail};
}

// ---------------------------------------------------------------------------

Args parse_args(int argc, char** argv) {
  Args a;
  for (int i = 1; i < argc; ++i) {
    const std::string k = argv[i];
    auto value = [&]() -> std::string {
      if (i + 1 >= argc) throw std::invalid_argument(k + " needs a value");
      return argv[++i];
    };
    if (k == "--runs") {
      a.runs = value();
    } else if (k == "--cli") {
      a.cli = value();
    } else if (k == "--source") {
      a.source = value();
    } else if (k == "--only") {
      a.only = std::stoi(value());
    } else {
      throw std::invalid_argument("unknown argument " + k);
    }
  }
  return a;
}

}  // namespace

int main(int argc, char** argv) {
  Args args;
  try {
    args = parse_args(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "TD(lambda)-max fixed point", criterion_fixed_point},
      {2, "contraction", criterion_contraction},
      {3, "twin-network replay", criterion_twin_replay},
      {4, "zero-harm identity", criterion_zero_harm},
      {5, "gradient check", criterion_gradient},
      {6, "desk-scale HARM_C violation vs mu", [&] { return criterion_desk_violation(args); }},
      {7, "desk-scale P_harm HARM_C vs MC", [&] { return criterion_desk_harm(args); }},
      {8, "counterfactual overhead", [&] { return criterion_overhead(args); }},
      {9, "evaluation-harness exactness", criterion_eval_exactness},
      {10, "shields on the wall env", criterion_shields},
      {11, "rerun determinism", [&] { return criterion_determinism(args); }},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    if (args.only && c.id != args.only) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.title << ": "
              << o.detail << std::endl;
  }
  return failed ? 1 : 0;
}
