#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "cfharm/checkpoint.hpp"
#include "cfharm/envs.hpp"
#include "cfharm/eval.hpp"
#include "cfharm/policy.hpp"
#include "cfharm/shield.hpp"
#include "cfharm/trainer.hpp"
#include "cfharm/wall.hpp"
#include "config.hpp"
#include "svg.hpp"

#ifndef CFHARM_VERSION
#define CFHARM_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace cfharm::cli {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(p.string() + ": " + e.what());
  }
}

// Explicit --out wins; otherwise $CFHARM_OUT (default "runs") / name.
fs::path output_dir(const std::string& out, const std::string& name, bool force) {
  fs::path dir;
  if (!out.empty()) {
    dir = out;
  } else {
    const char* root = std::getenv("CFHARM_OUT");
    dir = fs::path(root && *root ? root : "runs") / name;
  }
  if (fs::exists(dir / "manifest.json") && !force) {
    throw std::runtime_error(dir.string() +
                             " already holds a run (manifest.json); pass --force to overwrite");
  }
  fs::create_directories(dir);
  return dir;
}

json manifest_base(const std::string& command, const fs::path& dir) {
  json m;
  m["tool"] = "cfharm";
  m["version"] = CFHARM_VERSION;
  m["command"] = command;
  m["started"] = utc_now();
  m["paths"]["out"] = fs::absolute(dir).string();
  return m;
}

void save_manifest(const fs::path& dir, json& m, const std::string& status) {
  m["status"] = status;
  if (status != "running") m["finished"] = utc_now();
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

void write_cdf_file(const fs::path& p, std::span<const double> values) {
  std::ostringstream os;
  write_cdf(os, cdf(values));
  write_text(p, os.str());
}

json stats_json(const ViabilityStats& s) {
  json j;
  j["n_states"] = s.n_states;
  j["default_safe"] = s.default_safe;
  j["learner_safe"] = s.learner_safe;
  j["recalled"] = s.recalled;
  j["discovered"] = s.discovered;
  j["successes"] = s.successes;
  j["harmed"] = s.harmed;
  j["violations"] = s.n_states - s.learner_safe;
  // NaN (no kernel members) is written as null.
  j["recall"] = s.recall;
  j["dr"] = s.dr;
  j["success"] = s.success;
  j["p_harm"] = s.p_harm;
  return j;
}

// ---------------------------------------------------------------------------
// train

const char* kMetricsHeader =
    "update,episodes,violations,successes,violation_prob,success_rate,mean_reward,mean_harm,"
    "mean_constraint,threshold,w,lagrange_lr,loss_total,loss_policy,entropy,critic_reward,"
    "critic_cost_pi,critic_cost_mu,critic_constraint,approx_kl,clip_fraction,grad_norm\n";

std::string metrics_row(const UpdateMetrics& m) {
  std::ostringstream os;
  os << m.update << ',' << m.episodes << ',' << m.violations << ',' << m.successes << ','
     << num(m.violation_prob) << ',' << num(m.success_rate) << ',' << num(m.mean_reward) << ','
     << num(m.mean_harm) << ',' << num(m.mean_constraint) << ',' << num(m.threshold) << ','
     << num(m.w) << ',' << num(m.lagrange_lr) << ',' << num(m.loss.total) << ','
     << num(m.loss.policy) << ',' << num(m.loss.entropy);
  for (double c : m.loss.critic) os << ',' << num(c);
  os << ',' << num(m.loss.approx_kl) << ',' << num(m.loss.clip_fraction) << ','
     << num(m.grad_norm) << '\n';
  return os.str();
}

// Pooled violation and success rates over the trailing window of updates.
struct Window {
  std::vector<std::array<long, 3>> rows;  // episodes, violations, successes

  CheckpointRecord record(long update, int size) const {
    long e = 0, v = 0, s = 0;
    for (std::size_t i = rows.size() > static_cast<std::size_t>(size) ? rows.size() - size : 0;
         i < rows.size(); ++i) {
      e += rows[i][0];
      v += rows[i][1];
      s += rows[i][2];
    }
    CheckpointRecord r;
    r.update = update;
    r.violation_prob = e ? static_cast<double>(v) / e : 1.0;
    r.success_rate = e ? static_cast<double>(s) / e : 0.0;
    return r;
  }
};

Sections train_sections(const TrainArgs& a) {
  Sections s;
  if (!a.from_manifest.empty()) {
    const json m = read_json(a.from_manifest);
    if (m.value("command", "") != "train") {
      throw std::invalid_argument(a.from_manifest + " is not a train manifest");
    }
    return from_json(m.at("config"));
  }
  if (!a.config.empty()) s = read_ini(a.config);
  for (const std::string& kv : a.sets) apply_override(s, kv);
  if (!a.env.empty()) s["train"]["env"] = a.env;
  if (!a.formulation.empty()) s["train"]["formulation"] = a.formulation;
  if (a.updates >= 0) s["train"]["updates"] = std::to_string(a.updates);
  if (a.envs >= 0) s["train"]["envs"] = std::to_string(a.envs);
  if (a.seed >= 0) s["train"]["seed"] = std::to_string(a.seed);
  if (a.allow_regime_override) s["train"]["allow_regime_override"] = "true";
  return s;
}

// ---------------------------------------------------------------------------
// eval

json eval_args_json(const EvalArgs& a) {
  json j;
  j["checkpoint"] = a.checkpoint.empty() ? "" : fs::absolute(a.checkpoint).string();
  j["policy"] = a.policy;
  j["env"] = a.env;
  j["grid"] = a.grid;
  j["n_states"] = a.n_states;
  j["seed"] = a.seed;
  j["regime"] = a.regime;
  j["gamma"] = a.gamma;
  j["shield"] = a.shield;
  j["shield_samples"] = a.shield_samples;
  j["shield_steps"] = a.shield_steps;
  j["shield_threshold"] = a.shield_threshold;
  j["critic"] = a.critic;
  return j;
}

EvalArgs eval_args_from(const json& j) {
  EvalArgs a;
  a.checkpoint = j.at("checkpoint").get<std::string>();
  a.policy = j.at("policy").get<std::string>();
  a.env = j.at("env").get<std::string>();
  a.grid = j.at("grid").get<std::string>();
  a.n_states = j.at("n_states").get<long>();
  a.seed = j.at("seed").get<long>();
  a.regime = j.at("regime").get<std::string>();
  a.gamma = j.at("gamma").get<double>();
  a.shield = j.at("shield").get<std::string>();
  a.shield_samples = j.at("shield_samples").get<long>();
  a.shield_steps = j.at("shield_steps").get<long>();
  a.shield_threshold = j.at("shield_threshold").get<double>();
  a.critic = j.at("critic").get<std::string>();
  return a;
}

// State-feedback action of a built-in policy, for rollout critics.
std::function<Action(const EnvState&)> greedy(const Environment& env, const std::string& policy) {
  if (policy == "mu") return [&env](const EnvState& s) { return env.default_action(s); };
  if (policy == "reckless") {
    return [&env](const EnvState&) { return Action(env.action_dim(), 1.0); };
  }
  throw std::invalid_argument("rollout critics need mu or reckless as the policy; use --critic model");
}

// ---------------------------------------------------------------------------
// plot

struct MetricsTable {
  std::vector<double> update;
  std::vector<std::array<long, 3>> counts;  // episodes, violations, successes
};

MetricsTable read_metrics(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) header.push_back(c);
  }
  auto col = [&](const char* name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw std::runtime_error(p.string() + ": missing column " + name);
  };
  const std::size_t cu = col("update"), ce = col("episodes"), cv = col("violations"),
                    cs = col("successes");
  MetricsTable t;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string x;
    while (std::getline(ss, x, ',')) f.push_back(x);
    if (f.size() != header.size()) throw std::runtime_error(p.string() + ": ragged row");
    t.update.push_back(std::stod(f[cu]));
    t.counts.push_back({std::stol(f[ce]), std::stol(f[cv]), std::stol(f[cs])});
  }
  return t;
}

// Two-column curve of pooled rates over a trailing window.
std::vector<double> pooled(const MetricsTable& t, int which, int window) {
  std::vector<double> out(t.update.size());
  long e = 0, k = 0;
  for (std::size_t i = 0; i < t.update.size(); ++i) {
    e += t.counts[i][0];
    k += t.counts[i][which];
    if (i >= static_cast<std::size_t>(window)) {
      e -= t.counts[i - window][0];
      k -= t.counts[i - window][which];
    }
    out[i] = e ? static_cast<double>(k) / e : std::nan("");
  }
  return out;
}

void write_curve(const fs::path& p, const std::vector<double>& x, const std::vector<double>& y) {
  std::ostringstream os;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isfinite(y[i])) os << num(x[i]) << ' ' << num(y[i]) << '\n';
  }
  write_text(p, os.str());
}

bool read_curve(const fs::path& p, std::vector<double>& x, std::vector<double>& y) {
  std::ifstream in(p);
  if (!in) return false;
  double a = 0, b = 0;
  while (in >> a >> b) {
    x.push_back(a);
    y.push_back(b);
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------

int run_train(const TrainArgs& args) {
  const Sections sections = train_sections(args);
  const RunConfig rc = build_config(sections);
  const TrainConfig& c = rc.train;
  const fs::path dir = output_dir(
      args.out, c.env + "_" + c.formulation + "_s" + std::to_string(c.seed), args.force);
  fs::create_directories(dir / "checkpoints");

  json m = manifest_base("train", dir);
  m["env"] = c.env;
  m["formulation"] = c.formulation;
  m["seed"] = c.seed;
  m["config"] = to_json(snapshot(rc));
  m["paths"]["metrics"] = "metrics.csv";
  m["paths"]["timing"] = "timing.csv";
  m["paths"]["checkpoints"] = "checkpoints";
  if (!args.from_manifest.empty()) m["rerun_of"] = fs::absolute(args.from_manifest).string();
  save_manifest(dir, m, "running");

  Trainer trainer(c);
  const BaselineStats mu =
      baseline(trainer.env(), EvalConfig{rc.baseline_states, c.seed, c.regime, c.est.gamma});
  m["baseline"]["violation_prob"] = mu.violation_prob;
  m["baseline"]["n_states"] = mu.n_states;
  m["baseline"]["regime"] = std::string(to_string(c.regime));

  std::ofstream metrics(dir / "metrics.csv", std::ios::binary);
  std::ofstream timing(dir / "timing.csv", std::ios::binary);
  if (!metrics || !timing) throw std::runtime_error("cannot write metrics in " + dir.string());
  metrics << kMetricsHeader;
  timing << "update,seconds\n";

  Window window;
  std::vector<CheckpointRecord> records;
  std::vector<std::string> files;
  json checkpoints = json::array();
  auto checkpoint = [&](long update) {
    char name[48];
    std::snprintf(name, sizeof(name), "checkpoints/update_%06ld.ckpt", update);
    save_checkpoint((dir / name).string(), make_checkpoint(trainer));
    records.push_back(window.record(update, c.selection_window));
    files.push_back(name);
    checkpoints.push_back({{"update", update},
                           {"file", name},
                           {"violation_prob", records.back().violation_prob},
                           {"success_rate", records.back().success_rate}});
  };

  const auto t0 = std::chrono::steady_clock::now();
  try {
    for (long u = 1; u <= c.updates; ++u) {
      const UpdateMetrics um = trainer.update();
      metrics << metrics_row(um);
      timing << um.update << ',' << num(um.seconds) << '\n';
      metrics.flush();
      timing.flush();
      window.rows.push_back({um.episodes, um.violations, um.successes});
      if (u % c.checkpoint_every == 0 || u == c.updates) checkpoint(u);
      if (args.log_every > 0 && (u % args.log_every == 0 || u == c.updates)) {
        const CheckpointRecord r = window.record(u, c.selection_window);
        std::fprintf(stderr, "update %ld/%d  violation %.4f  success %.4f  w %.4g  %.1f s\n", u,
                     c.updates, r.violation_prob, r.success_rate, um.w,
                     std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      }
    }
  } catch (const NumericError& e) {
    metrics.flush();
    timing.flush();
    m["error"] = e.what();
    m["checkpoints"] = checkpoints;
    save_manifest(dir, m, "numeric abort");
    throw;
  }
  metrics.close();
  timing.close();

  const std::size_t pick = select_checkpoint(records);
  fs::copy_file(dir / files.back(), dir / "final.ckpt", fs::copy_options::overwrite_existing);
  fs::copy_file(dir / files[pick], dir / "selected.ckpt", fs::copy_options::overwrite_existing);
  m["checkpoints"] = checkpoints;
  m["paths"]["final"] = "final.ckpt";
  m["paths"]["selected"] = "selected.ckpt";
  m["selected_update"] = records[pick].update;
  save_manifest(dir, m, "ok");
  std::cout << "wrote " << dir.string() << "\n";
  return kOk;
}

int run_eval(const EvalArgs& given) {
  EvalArgs a = given;
  if (!given.from_manifest.empty()) {
    const json m = read_json(given.from_manifest);
    if (m.value("command", "") != "eval") {
      throw std::invalid_argument(given.from_manifest + " is not an eval manifest");
    }
    a = eval_args_from(m.at("args"));
    a.out = given.out;
    a.force = given.force;
    a.from_manifest = given.from_manifest;
  }
  if (a.n_states < 1) throw std::invalid_argument("--n-states must be >= 1");

  std::shared_ptr<const Environment> env;
  ActorCritic model;
  std::string label;
  if (!a.checkpoint.empty()) {
    if (a.policy.empty()) a.policy = "checkpoint";
    if (a.policy != "checkpoint") {
      throw std::invalid_argument("--policy " + a.policy + " cannot be combined with a checkpoint");
    }
    const Checkpoint ck = load_checkpoint(a.checkpoint);
    if (!a.env.empty() && a.env != ck.env) {
      throw std::invalid_argument("checkpoint " + a.checkpoint + " was trained on '" + ck.env +
                                  "', not '" + a.env + "'");
    }
    a.env = ck.env;
    if (a.grid.empty()) a.grid = ck.grid_path;
    env = make_environment(ck.env, a.grid);
    model = restore_model(ck);
    if (model.spec().obs_dim != env->obs_dim() || model.spec().action_dim != env->action_dim()) {
      throw std::invalid_argument("checkpoint " + a.checkpoint +
                                  " does not match the observation/action sizes of " + ck.env);
    }
    label = ck.formulation;
  } else {
    if (a.policy != "mu" && a.policy != "reckless") {
      throw std::invalid_argument("eval needs --checkpoint or --policy mu|reckless");
    }
    if (a.env.empty()) throw std::invalid_argument("--policy " + a.policy + " needs --env");
    env = make_environment(a.env, a.grid);
    label = a.policy;
  }
  const ShieldMode mode = parse_shield_mode(a.shield);
  if (a.critic.empty()) a.critic = a.policy == "checkpoint" ? "model" : "rollout";
  if (a.critic != "model" && a.critic != "rollout") {
    throw std::invalid_argument("--critic must be model or rollout");
  }
  if (a.critic == "model" && a.policy != "checkpoint") {
    throw std::invalid_argument("--critic model needs a checkpoint");
  }
  if (a.shield_steps < 0) a.shield_steps = a.env == "trailer" ? 4 : 5;

  EvalConfig cfg;
  cfg.n_states = static_cast<int>(a.n_states);
  cfg.seed = static_cast<std::uint64_t>(a.seed);
  cfg.regime = parse_init_regime(a.regime);
  cfg.gamma = a.gamma;

  std::string name = "eval_" + a.env + "_" + label + "_s" + std::to_string(a.seed);
  if (mode != ShieldMode::kNone) name += "_" + a.shield;
  const fs::path dir = output_dir(a.out, name, a.force);
  json m = manifest_base("eval", dir);
  m["env"] = a.env;
  m["formulation"] = label;
  m["seed"] = a.seed;
  m["args"] = eval_args_json(a);
  if (!a.from_manifest.empty()) m["rerun_of"] = fs::absolute(a.from_manifest).string();
  m["paths"]["rows"] = "rows.csv";
  m["paths"]["summary"] = "summary.json";
  save_manifest(dir, m, "running");

  std::unique_ptr<BatchPolicy> learner;
  if (a.policy == "checkpoint") {
    learner = std::make_unique<GaussianPolicy>(model);
  } else if (a.policy == "mu") {
    learner = std::make_unique<DefaultPolicy>(*env);
  } else {
    learner = std::make_unique<RecklessPolicy>(*env);
  }

  ShieldStats shield_stats;
  ViabilityReport report;
  if (mode == ShieldMode::kNone) {
    report = evaluate(*env, *learner, cfg);
  } else {
    CriticFn v_pi, v_mu;
    if (a.critic == "model") {
      v_pi = model_critic(model, Head::kCostPi);
      v_mu = model_critic(model, Head::kCostMu);
    } else {
      v_pi = rollout_critic(*env, greedy(*env, a.policy), a.gamma);
      v_mu = rollout_critic(*env, greedy(*env, "mu"), a.gamma);
    }
    EstimatorConfig est;
    est.gamma = a.gamma;
    ShieldConfig sc;
    sc.mode = mode;
    sc.samples = static_cast<int>(a.shield_samples);
    sc.n_steps = static_cast<int>(a.shield_steps);
    sc.threshold = a.shield_threshold;
    sc.validate();
    HarmDiscriminator d(*env, *learner, v_pi, v_mu, est, sc.n_steps, sc.samples);
    ShieldedPolicy shielded(*env, *learner, d, sc);
    report = evaluate(*env, shielded, cfg);
    shield_stats = shielded.stats();
  }

  std::ostringstream rows;
  write_rows_csv(rows, report.rows);
  write_text(dir / "rows.csv", rows.str());
  std::vector<double> learner_g, default_g, harm;
  for (const EvalRow& r : report.rows) {
    learner_g.push_back(r.learner_max_g);
    default_g.push_back(r.default_max_g);
    harm.push_back(r.learner_harm);
  }
  write_cdf_file(dir / "cdf_learner_max_g.txt", learner_g);
  write_cdf_file(dir / "cdf_default_max_g.txt", default_g);
  write_cdf_file(dir / "cdf_harm.txt", harm);

  json summary = stats_json(report.stats);
  summary["env"] = a.env;
  summary["policy"] = label;
  summary["regime"] = a.regime;
  summary["shield"]["mode"] = a.shield;
  summary["shield"]["decisions"] = shield_stats.decisions;
  summary["shield"]["replaced"] = shield_stats.replaced;
  summary["shield"]["infeasible"] = shield_stats.infeasible;
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  save_manifest(dir, m, "ok");

  const ViabilityStats& s = report.stats;
  std::printf("recall %.4f  dr %.4f  success %.4f  p_harm %.4f  violations %d/%d\n", s.recall,
              s.dr, s.success, s.p_harm, s.n_states - s.learner_safe, s.n_states);
  std::cout << "wrote " << dir.string() << "\n";
  return kOk;
}

int run_baseline(const BaselineArgs& given) {
  BaselineArgs a = given;
  if (!given.from_manifest.empty()) {
    const json m = read_json(given.from_manifest);
    if (m.value("command", "") != "baseline") {
      throw std::invalid_argument(given.from_manifest + " is not a baseline manifest");
    }
    const json& j = m.at("args");
    a.env = j.at("env").get<std::string>();
    a.grid = j.at("grid").get<std::string>();
    a.n_states = j.at("n_states").get<long>();
    a.seed = j.at("seed").get<long>();
    a.regime = j.at("regime").get<std::string>();
    a.gamma = j.at("gamma").get<double>();
  }
  if (a.n_states < 1) throw std::invalid_argument("--n-states must be >= 1");
  const auto env = make_environment(a.env, a.grid);
  EvalConfig cfg;
  cfg.n_states = static_cast<int>(a.n_states);
  cfg.seed = static_cast<std::uint64_t>(a.seed);
  cfg.regime = parse_init_regime(a.regime);
  cfg.gamma = a.gamma;

  const fs::path dir = output_dir(
      a.out, "baseline_" + a.env + "_" + a.regime + "_s" + std::to_string(a.seed), a.force);
  json m = manifest_base("baseline", dir);
  m["env"] = a.env;
  m["formulation"] = "mu";
  m["seed"] = a.seed;
  m["args"] = {{"env", a.env},       {"grid", a.grid},   {"n_states", a.n_states},
               {"seed", a.seed},     {"regime", a.regime}, {"gamma", a.gamma}};
  if (!a.from_manifest.empty()) m["rerun_of"] = fs::absolute(a.from_manifest).string();
  m["paths"]["max_g"] = "max_g.csv";
  m["paths"]["summary"] = "summary.json";
  save_manifest(dir, m, "running");

  const BaselineStats b = baseline(*env, cfg);
  std::ostringstream os;
  os << "index,max_g\n";
  for (std::size_t i = 0; i < b.max_g.size(); ++i) os << i << ',' << num(b.max_g[i]) << '\n';
  write_text(dir / "max_g.csv", os.str());
  write_cdf_file(dir / "cdf_default_max_g.txt", b.max_g);
  const json summary = {{"env", a.env},
                        {"regime", a.regime},
                        {"n_states", b.n_states},
                        {"violations", b.violations},
                        {"violation_prob", b.violation_prob}};
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  save_manifest(dir, m, "ok");
  std::printf("mu violation probability %.4f (%d/%d)\n", b.violation_prob, b.violations,
              b.n_states);
  std::cout << "wrote " << dir.string() << "\n";
  return kOk;
}

int run_plot(const PlotArgs& a) {
  const fs::path dir = a.dir;
  const fs::path out = a.out.empty() ? dir : fs::path(a.out);
  if (a.window < 1) throw std::invalid_argument("--window must be >= 1");
  const bool training = fs::exists(dir / "metrics.csv");
  const char* cdfs[] = {"cdf_learner_max_g.txt", "cdf_default_max_g.txt", "cdf_harm.txt"};
  bool any_cdf = false;
  for (const char* f : cdfs) any_cdf = any_cdf || fs::exists(dir / f);
  if (!training && !any_cdf) {
    throw std::runtime_error("nothing to plot in " + dir.string() +
                             ": expected metrics.csv (from train) or cdf_learner_max_g.txt, "
                             "cdf_default_max_g.txt, cdf_harm.txt (from eval or baseline)");
  }
  fs::create_directories(out);
  std::vector<std::string> written;

  if (training) {
    const MetricsTable t = read_metrics(dir / "metrics.csv");
    const std::vector<double> viol = pooled(t, 1, a.window);
    const std::vector<double> succ = pooled(t, 2, a.window);
    write_curve(out / "violation_curve.txt", t.update, viol);
    write_curve(out / "success_curve.txt", t.update, succ);
    written.insert(written.end(), {"violation_curve.txt", "success_curve.txt"});

    Chart vc{"Violation probability", "update", "P(violation)", {}};
    vc.series.push_back({"learner", t.update, viol});
    double base = std::nan("");
    if (fs::exists(dir / "manifest.json")) {
      const json m = read_json(dir / "manifest.json");
      if (m.contains("baseline")) base = m["baseline"].value("violation_prob", std::nan(""));
    }
    if (std::isfinite(base) && !t.update.empty()) {
      vc.series.push_back({"mu baseline",
                           {t.update.front(), t.update.back()},
                           {base, base},
                           "#d62728",
                           true});
    }
    write_text(out / "violation.svg", render_svg(vc));
    Chart sc{"Success rate", "update", "success", {}};
    sc.series.push_back({"learner", t.update, succ, "#2ca02c"});
    write_text(out / "success.svg", render_svg(sc));
    written.insert(written.end(), {"violation.svg", "success.svg"});
  }

  if (any_cdf) {
    Chart g{"CDF of episode max g", "max_t g(s_t)", "fraction of states", {}};
    const std::pair<const char*, const char*> sources[] = {
        {"cdf_learner_max_g.txt", "learner"}, {"cdf_default_max_g.txt", "mu"}};
    const char* colors[] = {"#1f77b4", "#d62728"};
    int k = 0;
    for (const auto& [file, label] : sources) {
      Series s;
      s.label = label;
      s.color = colors[k++];
      s.steps = true;
      if (read_curve(dir / file, s.x, s.y)) g.series.push_back(std::move(s));
    }
    if (!g.series.empty()) {
      write_text(out / "cdf_max_g.svg", render_svg(g));
      written.push_back("cdf_max_g.svg");
    }
    Series h;
    h.label = "learner";
    h.steps = true;
    if (read_curve(dir / "cdf_harm.txt", h.x, h.y)) {
      Chart hc{"CDF of episode harm", "harm", "fraction of states", {h}};
      write_text(out / "cdf_harm.svg", render_svg(hc));
      written.push_back("cdf_harm.svg");
    }
  }
  for (const std::string& f : written) std::cout << "wrote " << (out / f).string() << "\n";
  return kOk;
}

}  // namespace cfharm::cli
