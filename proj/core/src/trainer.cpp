#include "cfharm/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "cfharm/envs.hpp"
#include "cfharm/policy.hpp"

namespace cfharm {

TrainConfig TrainConfig::defaults(const std::string& env) {
  TrainConfig c;
  c.env = env;
  if (env == "trailer") {
    c.cf_steps = 4;
    c.envs = 512;
    c.updates = 3000;
    c.schedule = LagrangeSchedule::trailer();
    c.use_encoder = true;
  } else if (env != "rover" && env != "wall") {
    throw std::invalid_argument("unknown environment: " + env);
  }
  return c;
}

void TrainConfig::validate() const {
  const Formulation& f = form();  // throws on unknown names
  est.validate();
  auto positive = [](int v, const char* what) {
    if (v < 1) throw std::invalid_argument(std::string(what) + " must be >= 1");
  };
  positive(envs, "envs");
  positive(updates, "updates");
  positive(steps, "steps");
  positive(cf_steps, "cf_steps");
  positive(minibatches, "minibatches");
  positive(epochs, "epochs");
  positive(threshold_rollouts, "threshold_rollouts");
  positive(threshold_refresh, "threshold_refresh");
  positive(checkpoint_every, "checkpoint_every");
  positive(selection_window, "selection_window");
  if (minibatches > envs * steps) throw std::invalid_argument("more minibatches than samples");
  if (!(loss.clip > 0.0) || loss.entropy_coef < 0.0 || !(adam.lr > 0.0) || !(max_grad > 0.0)) {
    throw std::invalid_argument("clip, lr and max_grad must be positive; entropy_coef >= 0");
  }
  if (lagrange_init < 0.0) throw std::invalid_argument("lagrange_init must be >= 0");
  if (hidden.empty()) throw std::invalid_argument("need at least one hidden layer");
  if (regime != f.regime && !allow_regime_override) {
    throw std::invalid_argument(std::string(f.name) + " trains from the " +
                                std::string(to_string(f.regime)) +
                                " initial distribution; set allow_regime_override to use " +
                                std::string(to_string(regime)));
  }
}

ModelSpec TrainConfig::model_spec(const Environment& e) const {
  ModelSpec s;
  s.obs_dim = e.obs_dim();
  s.action_dim = e.action_dim();
  s.hidden = hidden;
  if (use_encoder && e.state_feature_dim() < e.obs_dim()) {
    s.state_features = e.state_feature_dim();
    s.encoder_hidden = encoder_hidden;
  }
  s.constraint_sigmoid = form().chance();
  return s;
}

namespace {

Vector row_copy(const Matrix& m, Head h) { return m.row(head_index(h)).transpose(); }

// Backward max-operator recursion over every environment's row of the batch,
// restarting at episode ends (seeded with `terminal`) and at the batch end
// (seeded with the critic).
Vector segmented_max(const TrajectoryBatch& b, const Vector& base,
                     const Vector& critic_next, const Vector& terminal,
                     double gamma, double lambda, double sign) {
  Vector out(b.size());
  for (int e = 0; e < b.envs; ++e) {
    for (int t = b.steps - 1; t >= 0; --t) {
      const int i = b.index(e, t);
      double ahead, critic;
      if (b.dones[i]) {
        ahead = critic = terminal[i];
      } else if (t == b.steps - 1) {
        ahead = critic = critic_next[i];
      } else {
        ahead = out[i + 1];
        critic = critic_next[i];
      }
      out[i] = std::max(base[i], gamma * (lambda * ahead + sign * (1.0 - lambda) * critic));
    }
  }
  return out;
}

// GAE over every environment's row; terminal states bootstrap with 0.
Vector segmented_gae(const TrajectoryBatch& b, const Vector& costs,
                     const Vector& values, const Vector& values_next,
                     double gamma, double lambda) {
  Vector adv(b.size());
  for (int e = 0; e < b.envs; ++e) {
    double running = 0.0;
    for (int t = b.steps - 1; t >= 0; --t) {
      const int i = b.index(e, t);
      const double live = b.dones[i] ? 0.0 : 1.0;
      const double delta = costs[i] + gamma * live * values_next[i] - values[i];
      running = delta + gamma * lambda * live * (t == b.steps - 1 ? 0.0 : running);
      adv[i] = running;
    }
  }
  return adv;
}

void require_finite(const Vector& v, const char* what, long update) {
  if (!v.allFinite()) {
    std::ostringstream os;
    os << "non-finite " << what << " at update " << update;
    throw NumericError(os.str());
  }
}

Minibatch gather(const TrajectoryBatch& b, const BatchTargets& tg,
                 const Vector& reward_adv, const std::vector<int>& idx,
                 std::size_t begin, std::size_t end,
                 const std::array<bool, kNumCritics>& trained) {
  const int n = static_cast<int>(end - begin);
  Minibatch mb;
  mb.obs.resize(b.obs_dim, n);
  mb.actions.resize(b.action_dim, n);
  mb.old_log_probs.resize(n);
  mb.reward_adv.resize(n);
  mb.constraint_adv.resize(n);
  mb.trained = trained;
  for (int c = 0; c < kNumCritics; ++c) {
    if (trained[c]) mb.targets[c].resize(n);
  }
  for (int j = 0; j < n; ++j) {
    const int i = idx[begin + j];
    mb.obs.col(j) = b.obs.col(i);
    mb.actions.col(j) = b.actions.col(i);
    mb.old_log_probs[j] = b.log_probs[i];
    mb.reward_adv[j] = reward_adv[i];
    mb.constraint_adv[j] = tg.constraint_adv[i];
    mb.targets[head_index(Head::kReward)][j] = tg.reward_return[i];
    mb.targets[head_index(Head::kCostPi)][j] = tg.cost_pi[i];
    if (trained[head_index(Head::kCostMu)]) mb.targets[head_index(Head::kCostMu)][j] = tg.cost_mu[i];
    mb.targets[head_index(Head::kConstraint)][j] = tg.constraint[i];
  }
  return mb;
}

}  // namespace

Trainer::Trainer(TrainConfig cfg)
    : Trainer(make_environment(cfg.env, cfg.grid_path), cfg) {}

Trainer::Trainer(std::shared_ptr<const Environment> env, TrainConfig cfg)
    : cfg_(std::move(cfg)),
      form_(&cfg_.form()),
      env_(std::move(env)),
      model_(cfg_.model_spec(*env_)),
      adam_(model_.num_params(), cfg_.adam),
      venv_(*env_, cfg_.envs, cfg_.regime, cfg_.seed),
      policy_rng_(derive_rng(cfg_.seed, 0, 0xac7)),
      shuffle_rng_(derive_rng(cfg_.seed, 0, 0x5f1e)),
      w_(cfg_.lagrange_init) {
  cfg_.validate();
  Rng init = derive_rng(cfg_.seed, 0, 0x1417);
  model_.initialize(init);
}

BatchTargets Trainer::compute_targets(const TrajectoryBatch& b) const {
  const int n = b.size();
  const double gamma = cfg_.est.gamma;
  const double lambda = cfg_.est.lambda;
  const bool use_cf = form_->needs_counterfactual();
  BatchTargets tg;

  CounterfactualBatch cf;
  if (use_cf) cf = simulate_counterfactual_batch(*env_, b, cfg_.cf_steps);

  const bool ccate = use_cf && form_->base == BaseQuantity::kCcate;
  const Matrix cur = model_.values(b.obs, {true, false, ccate, true});
  const Matrix nxt = model_.values(b.next_obs, {true, true, ccate, true});

  const Vector vr = row_copy(cur, Head::kReward);
  tg.reward_adv = segmented_gae(b, b.rewards, vr, row_copy(nxt, Head::kReward), gamma, lambda);
  tg.reward_return = tg.reward_adv + vr;

  const Vector cost_pi_next = row_copy(nxt, Head::kCostPi);
  tg.cost_pi = segmented_max(b, b.g, cost_pi_next, b.next_g, gamma, lambda, 1.0);

  Vector base(n), terminal(n);
  if (use_cf) {
    const Vector cfv = model_.value(Head::kCostMu, cf.obs);
    const std::vector<double> mu = counterfactual_values(
        cf, b, {cfv.data(), static_cast<std::size_t>(cfv.size())}, cfg_.est);
    tg.cost_mu = Eigen::Map<const Vector>(mu.data(), n);
    tg.windows = window_lengths(b, cfg_.cf_steps);
    if (form_->base == BaseQuantity::kHarm) {
      const std::vector<double> pi = learner_window_values(
          b, tg.windows, {cost_pi_next.data(), static_cast<std::size_t>(n)}, cfg_.est);
      const std::vector<double> h = harm_targets(pi, mu);
      tg.harm = Eigen::Map<const Vector>(h.data(), n);
      for (int i = 0; i < n; ++i) {
        base[i] = form_->apply(tg.harm[i]);
        terminal[i] = form_->apply(0.0);
      }
    } else {
      const Vector vmu = row_copy(cur, Head::kCostMu);
      const Vector vmu_next = row_copy(nxt, Head::kCostMu);
      tg.ccate.resize(n);
      for (int i = 0; i < n; ++i) {
        tg.ccate[i] = tg.cost_pi[i] - relu(vmu[i]);
        base[i] = form_->apply(tg.ccate[i]);
        terminal[i] = form_->apply(b.next_g[i] - relu(vmu_next[i]));
      }
    }
  } else {
    for (int i = 0; i < n; ++i) {
      base[i] = form_->apply(b.g[i]);
      terminal[i] = form_->apply(b.next_g[i]);
    }
  }

  const Vector vc = row_copy(cur, Head::kConstraint);
  const Vector vc_next = row_copy(nxt, Head::kConstraint);
  if (form_->aggregation == Aggregation::kMax) {
    const double sign =
        form_->base == BaseQuantity::kHarm && cfg_.est.harm_return_minus ? -1.0 : 1.0;
    tg.constraint = segmented_max(b, base, vc_next, terminal, gamma, lambda, sign);
    tg.constraint_adv = tg.constraint - vc;
  } else {
    Vector costs(n);
    for (int i = 0; i < n; ++i) costs[i] = form_->apply(b.next_g[i]);
    tg.constraint_adv = segmented_gae(b, costs, vc, vc_next, gamma, lambda);
    tg.constraint = tg.constraint_adv + vc;
  }
  return tg;
}

UpdateMetrics Trainer::update() {
  const auto t0 = std::chrono::steady_clock::now();
  ++update_;
  UpdateMetrics m;
  m.update = update_;

  if (form_->threshold == ThresholdKind::kDefaultPolicy &&
      (update_ - 1) % cfg_.threshold_refresh == 0) {
    Rng r = derive_rng(cfg_.seed, static_cast<std::uint64_t>(update_), 0x7417);
    threshold_ = estimate_default_threshold(*env_, *form_, r, cfg_.threshold_rollouts,
                                            cfg_.est.gamma);
  }

  GaussianPolicy policy(model_);
  TrajectoryBatch batch = venv_.rollout(policy, cfg_.steps, policy_rng_);
  for (const EpisodeSummary& ep : venv_.finished()) {
    ++m.episodes;
    if (ep.max_g > 0.0) ++m.violations;
    if (ep.success) ++m.successes;
  }
  m.violation_prob = m.episodes ? static_cast<double>(m.violations) / m.episodes
                                : std::numeric_limits<double>::quiet_NaN();
  m.success_rate = m.episodes ? static_cast<double>(m.successes) / m.episodes
                              : std::numeric_limits<double>::quiet_NaN();
  m.mean_reward = batch.rewards.mean();

  const BatchTargets tg = compute_targets(batch);
  require_finite(tg.reward_return, "reward return", update_);
  require_finite(tg.cost_pi, "constraint value target", update_);
  require_finite(tg.constraint, "formulation target", update_);
  if (tg.cost_mu.size()) require_finite(tg.cost_mu, "counterfactual value", update_);
  m.mean_harm = tg.harm.size() ? tg.harm.mean() : 0.0;
  m.mean_constraint = tg.constraint.mean();

  Vector reward_adv = tg.reward_adv;
  if (cfg_.normalize_reward_adv) {
    const double mean = reward_adv.mean();
    const double var = (reward_adv.array() - mean).square().mean();
    reward_adv = (reward_adv.array() - mean) / (std::sqrt(var) + 1e-8);
  }

  std::array<bool, kNumCritics> trained{true, true, form_->needs_counterfactual(), true};
  const int n = batch.size();
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Vector grad;
  int passes = 0;
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    std::shuffle(idx.begin(), idx.end(), shuffle_rng_);
    for (int k = 0; k < cfg_.minibatches; ++k) {
      const std::size_t begin = static_cast<std::size_t>(n) * k / cfg_.minibatches;
      const std::size_t end = static_cast<std::size_t>(n) * (k + 1) / cfg_.minibatches;
      const Minibatch mb = gather(batch, tg, reward_adv, idx, begin, end, trained);
      const LossTerms lt = ppo_loss(model_, mb, w_, cfg_.loss, &grad);
      if (!std::isfinite(lt.total) || !grad.allFinite()) {
        std::ostringstream os;
        os << "non-finite loss at update " << update_ << " epoch " << epoch
           << " minibatch " << k << " (policy " << lt.policy << ", critics "
           << lt.critic[0] << ' ' << lt.critic[1] << ' ' << lt.critic[2] << ' '
           << lt.critic[3] << ", w " << w_ << ")";
        throw NumericError(os.str());
      }
      m.grad_norm += clip_global(grad, cfg_.max_grad);
      adam_.step(model_.params(), grad);
      model_.clamp_log_std();
      m.loss.total += lt.total;
      m.loss.policy += lt.policy;
      m.loss.entropy += lt.entropy;
      m.loss.approx_kl += lt.approx_kl;
      m.loss.clip_fraction += lt.clip_fraction;
      for (int c = 0; c < kNumCritics; ++c) m.loss.critic[c] += lt.critic[c];
      ++passes;
    }
  }
  const double inv = 1.0 / passes;
  m.loss.total *= inv;
  m.loss.policy *= inv;
  m.loss.entropy *= inv;
  m.loss.approx_kl *= inv;
  m.loss.clip_fraction *= inv;
  for (double& c : m.loss.critic) c *= inv;
  m.grad_norm *= inv;

  m.lagrange_lr = cfg_.schedule.rate(update_, cfg_.updates);
  w_ = lagrange_update(w_, m.mean_constraint, threshold_, m.lagrange_lr);
  m.w = w_;
  m.threshold = threshold_;
  last_batch_ = std::move(batch);
  m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return m;
}

std::size_t select_checkpoint(const std::vector<CheckpointRecord>& records) {
  if (records.empty()) throw std::invalid_argument("select_checkpoint: no checkpoints");
  std::size_t best = 0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const CheckpointRecord& a = records[i];
    const CheckpointRecord& b = records[best];
    if (a.violation_prob < b.violation_prob ||
        (a.violation_prob == b.violation_prob && a.success_rate > b.success_rate)) {
      best = i;
    }
  }
  const std::size_t last = records.size() - 1;
  // Keep the final policy unless it got worse than the best one.
  if (records[last].violation_prob <= records[best].violation_prob &&
      !(records[last].violation_prob == records[best].violation_prob &&
        records[last].success_rate < records[best].success_rate)) {
    return last;
  }
  return best;
}

}  // namespace cfharm
