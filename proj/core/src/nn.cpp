#include "cfharm/nn.hpp"

#include <cmath>
#include <numbers>

namespace cfharm {

namespace {
using ConstMatMap = Eigen::Map<const Matrix>;
using MatMap = Eigen::Map<Matrix>;
using ConstVecMap = Eigen::Map<const Vector>;
using VecMap = Eigen::Map<Vector>;
}  // namespace

Matrix tanh_activation(const Matrix& z) {
  // Eigen's double exp is vectorized while std::tanh is not; this form is
  // accurate to a few ulp in absolute terms.
  const Eigen::ArrayXXd t = (-2.0 * z.array().abs()).exp();
  return (z.array().sign() * (1.0 - t) / (1.0 + t)).matrix();
}

MlpLayout::MlpLayout(std::vector<int> widths, bool tanh_output)
    : widths_(std::move(widths)), tanh_output_(tanh_output) {
  if (widths_.size() < 3) {
    throw std::invalid_argument("MLP needs at least one hidden layer");
  }
  for (int w : widths_) {
    if (w <= 0) throw std::invalid_argument("MLP widths must be positive");
  }
  offsets_.resize(widths_.size() - 1);
  for (int l = 0; l < num_layers(); ++l) {
    offsets_[l] = num_params_;
    num_params_ += static_cast<std::size_t>(widths_[l + 1]) * (widths_[l] + 1);
  }
}

Matrix MlpLayout::forward(const double* params, const Matrix& in,
                          Cache* cache) const {
  if (in.rows() != in_dim()) {
    throw std::invalid_argument("MLP input has " + std::to_string(in.rows()) +
                                " rows, expected " + std::to_string(in_dim()));
  }
  if (cache) {
    cache->activations.resize(widths_.size());
    cache->activations[0] = in;
  }
  Matrix h = in;
  for (int l = 0; l < num_layers(); ++l) {
    ConstMatMap W(params + weight_offset(l), widths_[l + 1], widths_[l]);
    ConstVecMap b(params + bias_offset(l), widths_[l + 1]);
    Matrix z = W * h;
    z.colwise() += b;
    if (l + 1 < num_layers() || tanh_output_) z = tanh_activation(z);
    h = std::move(z);
    if (cache) cache->activations[l + 1] = h;
  }
  return h;
}

Matrix MlpLayout::backward(const double* params, const Cache& cache,
                           const Matrix& dout, double* grad,
                           bool input_grad) const {
  Matrix delta = dout;
  if (tanh_output_) {
    delta.array() *= 1.0 - cache.activations.back().array().square();
  }
  for (int l = num_layers() - 1; l >= 0; --l) {
    const Matrix& a_in = cache.activations[l];
    MatMap dW(grad + weight_offset(l), widths_[l + 1], widths_[l]);
    VecMap db(grad + bias_offset(l), widths_[l + 1]);
    dW.noalias() += delta * a_in.transpose();
    db += delta.rowwise().sum();
    if (l == 0 && !input_grad) break;
    ConstMatMap W(params + weight_offset(l), widths_[l + 1], widths_[l]);
    Matrix prev = W.transpose() * delta;
    if (l > 0) prev.array() *= 1.0 - a_in.array().square();
    delta = std::move(prev);
  }
  return input_grad ? delta : Matrix();
}

void MlpLayout::init(double* params, Rng& rng, double output_scale) const {
  for (int l = 0; l < num_layers(); ++l) {
    const double scale = (l + 1 == num_layers() ? output_scale : 1.0) /
                         std::sqrt(static_cast<double>(widths_[l]));
    MatMap W(params + weight_offset(l), widths_[l + 1], widths_[l]);
    for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = scale * standard_normal(rng);
    VecMap(params + bias_offset(l), widths_[l + 1]).setZero();
  }
}

double gaussian_log_prob(const double* mean, const double* log_std,
                         const double* action, int dim) {
  constexpr double kHalfLog2Pi = 0.91893853320467274178;
  double lp = 0.0;
  for (int k = 0; k < dim; ++k) {
    const double z = (action[k] - mean[k]) * std::exp(-log_std[k]);
    lp += -0.5 * z * z - log_std[k] - kHalfLog2Pi;
  }
  return lp;
}

double gaussian_entropy(std::span<const double> log_std) {
  // 0.5 * log(2 * pi * e)
  constexpr double kHalfLog2PiE = 1.41893853320467274178;
  double h = 0.0;
  for (double ls : log_std) h += ls + kHalfLog2PiE;
  return h;
}

Adam::Adam(std::size_t num_params, AdamConfig cfg)
    : cfg_(cfg),
      m_(Vector::Zero(static_cast<Eigen::Index>(num_params))),
      v_(Vector::Zero(static_cast<Eigen::Index>(num_params))) {}

void Adam::step(Vector& params, const Vector& grad) {
  if (grad.size() != params.size() || grad.size() != m_.size()) {
    throw std::invalid_argument("Adam: shape mismatch");
  }
  ++t_;
  m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
  v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  params.array() -= cfg_.lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + cfg_.eps);
}

void Adam::restore(Vector m, Vector v, long t) {
  if (m.size() != v.size()) throw std::invalid_argument("Adam: moment size mismatch");
  m_ = std::move(m);
  v_ = std::move(v);
  t_ = t;
}

double clip_global(Vector& grad, double max_norm) {
  const double norm = grad.norm();
  if (norm > max_norm && norm > 0.0) grad *= max_norm / norm;
  return norm;
}

}  // namespace cfharm
