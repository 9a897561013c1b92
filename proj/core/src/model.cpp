#include "cfharm/model.hpp"

#include <algorithm>

namespace cfharm {

namespace {

std::vector<int> with_ends(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> w{in};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(out);
  return w;
}

}  // namespace

ActorCritic::ActorCritic(ModelSpec spec) : spec_(std::move(spec)) {
  if (spec_.obs_dim <= 0 || spec_.action_dim <= 0) {
    throw std::invalid_argument("model: obs/action dimensions must be positive");
  }
  if (spec_.hidden.empty()) throw std::invalid_argument("model: need hidden layers");
  std::size_t offset = 0;
  feature_dim_ = spec_.obs_dim;
  if (spec_.has_encoder()) {
    if (spec_.state_features >= spec_.obs_dim || spec_.encoder_hidden.size() < 2) {
      throw std::invalid_argument("model: bad encoder specification");
    }
    // All encoder layers are tanh; its last hidden width is the output.
    std::vector<int> w{spec_.obs_dim - spec_.state_features};
    w.insert(w.end(), spec_.encoder_hidden.begin(), spec_.encoder_hidden.end());
    encoder_ = MlpLayout(w, /*tanh_output=*/true);
    encoder_offset_ = offset;
    offset += encoder_.num_params();
    feature_dim_ = spec_.state_features + encoder_.out_dim();
  }
  actor_ = MlpLayout(with_ends(feature_dim_, spec_.hidden, spec_.action_dim));
  actor_offset_ = offset;
  offset += actor_.num_params();
  log_std_offset_ = offset;
  offset += spec_.action_dim;
  for (int c = 0; c < kNumCritics; ++c) {
    critics_[c] = MlpLayout(with_ends(feature_dim_, spec_.hidden, 1));
    critic_offset_[c] = offset;
    offset += critics_[c].num_params();
  }
  params_ = Vector::Zero(static_cast<Eigen::Index>(offset));
  for (double& ls : log_std()) ls = spec_.log_std_init;
}

void ActorCritic::initialize(Rng& rng) {
  if (spec_.has_encoder()) encoder_.init(params_.data() + encoder_offset_, rng, 1.0);
  actor_.init(params_.data() + actor_offset_, rng, spec_.actor_output_scale);
  for (double& ls : log_std()) ls = spec_.log_std_init;
  for (int c = 0; c < kNumCritics; ++c) {
    critics_[c].init(params_.data() + critic_offset_[c], rng, 1.0);
  }
}

void ActorCritic::clamp_log_std() {
  for (double& ls : log_std()) ls = std::clamp(ls, spec_.log_std_min, spec_.log_std_max);
}

Matrix ActorCritic::features(const Matrix& obs, MlpLayout::Cache* cache) const {
  if (obs.rows() != spec_.obs_dim) {
    throw std::invalid_argument("model: observation has " + std::to_string(obs.rows()) +
                                " rows, expected " + std::to_string(spec_.obs_dim));
  }
  if (!spec_.has_encoder()) return obs;
  const int sf = spec_.state_features;
  const Matrix enc = encoder_.forward(params_.data() + encoder_offset_,
                                      obs.bottomRows(spec_.obs_dim - sf), cache);
  Matrix f(feature_dim_, obs.cols());
  f.topRows(sf) = obs.topRows(sf);
  f.bottomRows(enc.rows()) = enc;
  return f;
}

void ActorCritic::forward(const Matrix& obs, std::array<bool, kNumCritics> heads,
                          Pass& pass) const {
  pass.features = features(obs, spec_.has_encoder() ? &pass.encoder : nullptr);
  pass.mean = actor_.forward(params_.data() + actor_offset_, pass.features, &pass.actor);
  pass.active = heads;
  for (int c = 0; c < kNumCritics; ++c) {
    if (!heads[c]) continue;
    pass.raw[c] = critics_[c].forward(params_.data() + critic_offset_[c],
                                      pass.features, &pass.critic[c]);
  }
}

void ActorCritic::backward(const Pass& pass, const Matrix* d_mean,
                           const std::array<const Matrix*, kNumCritics>& d_raw,
                           Vector& grad) const {
  const bool enc = spec_.has_encoder();
  Matrix d_features;
  auto accumulate = [&](const Matrix& d) {
    if (!enc) return;
    if (d_features.size() == 0) {
      d_features = d;
    } else {
      d_features += d;
    }
  };
  if (d_mean) {
    accumulate(actor_.backward(params_.data() + actor_offset_, pass.actor, *d_mean,
                               grad.data() + actor_offset_, enc));
  }
  for (int c = 0; c < kNumCritics; ++c) {
    if (!d_raw[c]) continue;
    if (!pass.active[c]) throw std::logic_error("model: gradient for inactive head");
    accumulate(critics_[c].backward(params_.data() + critic_offset_[c], pass.critic[c],
                                    *d_raw[c], grad.data() + critic_offset_[c], enc));
  }
  if (enc && d_features.size() > 0) {
    const int sf = spec_.state_features;
    encoder_.backward(params_.data() + encoder_offset_, pass.encoder,
                      d_features.bottomRows(d_features.rows() - sf),
                      grad.data() + encoder_offset_, false);
  }
}

Matrix ActorCritic::mean(const Matrix& obs) const {
  return actor_.forward(params_.data() + actor_offset_, features(obs, nullptr), nullptr);
}

Vector ActorCritic::value(Head head, const Matrix& obs) const {
  const int c = head_index(head);
  Vector v = critics_[c]
                 .forward(params_.data() + critic_offset_[c], features(obs, nullptr), nullptr)
                 .row(0)
                 .transpose();
  if (sigmoid_head(head)) v = v.unaryExpr([](double z) { return sigmoid(z); });
  return v;
}

Matrix ActorCritic::values(const Matrix& obs) const {
  return values(obs, {true, true, true, true});
}

Matrix ActorCritic::values(const Matrix& obs, std::array<bool, kNumCritics> heads) const {
  const Matrix f = features(obs, nullptr);
  Matrix out = Matrix::Zero(kNumCritics, obs.cols());
  for (int c = 0; c < kNumCritics; ++c) {
    if (!heads[c]) continue;
    out.row(c) = critics_[c].forward(params_.data() + critic_offset_[c], f, nullptr);
    if (sigmoid_head(static_cast<Head>(c))) {
      out.row(c) = out.row(c).unaryExpr([](double z) { return sigmoid(z); });
    }
  }
  return out;
}

void ActorCritic::copy_head(Head from, Head to) {
  const int f = head_index(from), t = head_index(to);
  const std::size_t n = critics_[f].num_params();
  std::copy_n(params_.data() + critic_offset_[f], n, params_.data() + critic_offset_[t]);
}

}  // namespace cfharm
