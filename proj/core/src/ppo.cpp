#include "cfharm/ppo.hpp"

#include <algorithm>
#include <cmath>

namespace cfharm {

namespace {

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

double surrogate_objective(double ratio, double reward_adv, double constraint_adv,
                           double w, const LossConfig& cfg) {
  const double lo = 1.0 - cfg.clip;
  const double hi = 1.0 + cfg.clip;
  const double clipped = std::clamp(ratio, lo, hi);
  if (cfg.clip_combined) {
    const double a = reward_adv - w * constraint_adv;
    return std::min(ratio * a, clipped * a);
  }
  return std::min(ratio * reward_adv, clipped * reward_adv) - w * ratio * constraint_adv;
}

double mse(const Vector& pred, const Vector& target) {
  if (pred.size() != target.size() || pred.size() == 0) {
    throw std::invalid_argument("mse: size mismatch");
  }
  return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

double bce_with_logits(const Vector& logits, const Vector& target) {
  if (logits.size() != target.size() || logits.size() == 0) {
    throw std::invalid_argument("bce: size mismatch");
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    sum += softplus(logits[i]) - target[i] * logits[i];
  }
  return sum / static_cast<double>(logits.size());
}

LossTerms ppo_loss(const ActorCritic& model, const Minibatch& mb, double w,
                   const LossConfig& cfg, Vector* grad) {
  const int B = mb.size();
  if (B == 0) throw std::invalid_argument("ppo_loss: empty minibatch");
  const int d = model.spec().action_dim;
  ActorCritic::Pass pass;
  model.forward(mb.obs, mb.trained, pass);

  const auto log_std = model.log_std();
  std::vector<double> inv_var(d);
  for (int k = 0; k < d; ++k) inv_var[k] = std::exp(-2.0 * log_std[k]);

  LossTerms terms;
  Matrix d_mean = Matrix::Zero(d, B);
  std::vector<double> d_log_std(d, 0.0);
  const double invB = 1.0 / B;
  const double lo = 1.0 - cfg.clip;
  const double hi = 1.0 + cfg.clip;
  double objective = 0.0;
  for (int j = 0; j < B; ++j) {
    const double lp = gaussian_log_prob(&pass.mean(0, j), log_std.data(), &mb.actions(0, j), d);
    const double log_ratio = lp - mb.old_log_probs[j];
    const double ratio = std::exp(log_ratio);
    objective += surrogate_objective(ratio, mb.reward_adv[j], mb.constraint_adv[j], w, cfg);
    terms.approx_kl += (ratio - 1.0) - log_ratio;
    if (ratio < lo || ratio > hi) terms.clip_fraction += 1.0;

    // d(objective_j)/d(log pi) = ratio * (active advantage).
    double g_lp;
    const double clipped = std::clamp(ratio, lo, hi);
    if (cfg.clip_combined) {
      const double a = mb.reward_adv[j] - w * mb.constraint_adv[j];
      g_lp = ratio * a <= clipped * a ? ratio * a : 0.0;
    } else {
      const double a = mb.reward_adv[j];
      g_lp = (ratio * a <= clipped * a ? ratio * a : 0.0) - w * ratio * mb.constraint_adv[j];
    }
    if (!grad || g_lp == 0.0) continue;
    // Loss is -objective / B.
    const double scale = -g_lp * invB;
    for (int k = 0; k < d; ++k) {
      const double diff = mb.actions(k, j) - pass.mean(k, j);
      d_mean(k, j) = scale * diff * inv_var[k];
      d_log_std[k] += scale * (diff * diff * inv_var[k] - 1.0);
    }
  }
  terms.policy = -objective * invB;
  terms.approx_kl *= invB;
  terms.clip_fraction *= invB;
  terms.entropy = gaussian_entropy(log_std);
  terms.total = terms.policy - cfg.entropy_coef * terms.entropy;

  std::array<Matrix, kNumCritics> d_raw;
  std::array<const Matrix*, kNumCritics> d_raw_ptr{};
  for (int c = 0; c < kNumCritics; ++c) {
    if (!mb.trained[c]) continue;
    const Vector raw = pass.raw[c].row(0).transpose();
    const Vector& y = mb.targets[c];
    if (y.size() != B) throw std::invalid_argument("ppo_loss: target size mismatch");
    if (model.sigmoid_head(static_cast<Head>(c))) {
      terms.critic[c] = bce_with_logits(raw, y);
      if (grad) {
        d_raw[c] = (cfg.critic_coef * invB *
                    (raw.unaryExpr([](double z) { return sigmoid(z); }) - y))
                       .transpose();
      }
    } else {
      terms.critic[c] = mse(raw, y);
      if (grad) d_raw[c] = (cfg.critic_coef * 2.0 * invB * (raw - y)).transpose();
    }
    terms.total += cfg.critic_coef * terms.critic[c];
    if (grad) d_raw_ptr[c] = &d_raw[c];
  }

  if (grad) {
    grad->setZero(static_cast<Eigen::Index>(model.num_params()));
    model.backward(pass, &d_mean, d_raw_ptr, *grad);
    const std::size_t off = model.log_std_offset();
    for (int k = 0; k < d; ++k) {
      (*grad)[static_cast<Eigen::Index>(off + k)] += d_log_std[k] - cfg.entropy_coef;
    }
  }
  return terms;
}

double LagrangeSchedule::rate(long update, long total_updates) const {
  if (total_updates < 1) throw std::invalid_argument("schedule: total updates must be >= 1");
  const double scale = static_cast<double>(total_updates) / reference_total;
  const double h = hold * scale;
  const double end = ramp_end * scale;
  const double k = static_cast<double>(update);
  if (k <= h) return base_lr;
  if (k >= end) return final_lr;
  return base_lr + (final_lr - base_lr) * (k - h) / (end - h);
}

double lagrange_update(double w, double mean_target, double threshold, double lr) {
  return std::max(0.0, w + lr * (mean_target - threshold));
}

}  // namespace cfharm
