#ifndef CFHARM_NN_HPP_
#define CFHARM_NN_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "cfharm/common.hpp"

namespace cfharm {

// Dense network with tanh hidden layers. Parameters live in caller-owned
// flat storage: for each layer the weight matrix (out x in, column-major)
// followed by the bias.
class MlpLayout {
 public:
  MlpLayout() = default;
  // widths = [input, hidden..., output]; needs at least one hidden layer.
  explicit MlpLayout(std::vector<int> widths, bool tanh_output = false);

  int in_dim() const { return widths_.front(); }
  int out_dim() const { return widths_.back(); }
  int num_layers() const { return static_cast<int>(widths_.size()) - 1; }
  std::size_t num_params() const { return num_params_; }
  const std::vector<int>& widths() const { return widths_; }
  bool tanh_output() const { return tanh_output_; }

  struct Cache {
    std::vector<Matrix> activations;  // [0] is the input
  };

  // in: in_dim x batch. Fills `cache` when non-null.
  Matrix forward(const double* params, const Matrix& in, Cache* cache) const;

  // Accumulates d(loss)/d(params) into `grad` given d(loss)/d(output).
  // Returns d(loss)/d(input) when `input_grad` is set, else an empty matrix.
  Matrix backward(const double* params, const Cache& cache, const Matrix& dout,
                  double* grad, bool input_grad) const;

  // LeCun-normal hidden layers, output layer scaled by `output_scale`,
  // zero biases.
  void init(double* params, Rng& rng, double output_scale) const;

 private:
  std::size_t weight_offset(int layer) const { return offsets_[layer]; }
  std::size_t bias_offset(int layer) const {
    return offsets_[layer] + static_cast<std::size_t>(widths_[layer + 1]) * widths_[layer];
  }

  std::vector<int> widths_;
  std::vector<std::size_t> offsets_;
  std::size_t num_params_ = 0;
  bool tanh_output_ = false;
};

// Elementwise tanh used by every hidden layer.
Matrix tanh_activation(const Matrix& z);

// Diagonal Gaussian with state-independent log standard deviation.
double gaussian_log_prob(const double* mean, const double* log_std,
                         const double* action, int dim);
double gaussian_entropy(std::span<const double> log_std);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam() = default;
  Adam(std::size_t num_params, AdamConfig cfg);

  void step(Vector& params, const Vector& grad);

  const AdamConfig& config() const { return cfg_; }
  long steps() const { return t_; }
  const Vector& first_moment() const { return m_; }
  const Vector& second_moment() const { return v_; }
  void restore(Vector m, Vector v, long t);

 private:
  AdamConfig cfg_;
  Vector m_, v_;
  long t_ = 0;
};

// Rescales `grad` so its L2 norm is at most max_norm. Returns the norm
// before clipping.
double clip_global(Vector& grad, double max_norm);

}  // namespace cfharm

#endif  // CFHARM_NN_HPP_
