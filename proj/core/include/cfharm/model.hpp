#ifndef CFHARM_MODEL_HPP_
#define CFHARM_MODEL_HPP_

#include <array>
#include <span>
#include <vector>

#include "cfharm/nn.hpp"

namespace cfharm {

// The four critics: reward, learner constraint value V_g^pi, default-policy
// constraint value V_g^mu, and the critic of the active constraint
// formulation (harm, CCATE, ...).
enum class Head : int { kReward = 0, kCostPi = 1, kCostMu = 2, kConstraint = 3 };
inline constexpr int kNumCritics = 4;
inline constexpr int head_index(Head h) { return static_cast<int>(h); }

struct ModelSpec {
  int obs_dim = 0;
  int action_dim = 0;
  std::vector<int> hidden{256, 256};
  // When >= 0, observation rows [state_features, obs_dim) pass through a
  // shared tanh encoder whose output is concatenated with the leading rows.
  int state_features = -1;
  std::vector<int> encoder_hidden{256, 256};
  // The constraint critic predicts a probability (sigmoid head).
  bool constraint_sigmoid = false;
  double log_std_init = -0.5;
  double log_std_min = -5.0;
  double log_std_max = 2.0;
  double actor_output_scale = 1e-2;

  bool has_encoder() const { return state_features >= 0; }
  bool operator==(const ModelSpec&) const = default;
};

// Gaussian actor with state-independent log-std plus four scalar critics,
// all parameters in one flat vector:
// [encoder][actor mean][log std][critic 0..3].
class ActorCritic {
 public:
  ActorCritic() = default;
  explicit ActorCritic(ModelSpec spec);

  void initialize(Rng& rng);

  const ModelSpec& spec() const { return spec_; }
  Vector& params() { return params_; }
  const Vector& params() const { return params_; }
  std::size_t num_params() const { return static_cast<std::size_t>(params_.size()); }
  int feature_dim() const { return feature_dim_; }

  std::span<double> log_std() {
    return {params_.data() + log_std_offset_, static_cast<std::size_t>(spec_.action_dim)};
  }
  std::span<const double> log_std() const {
    return {params_.data() + log_std_offset_, static_cast<std::size_t>(spec_.action_dim)};
  }
  std::size_t log_std_offset() const { return log_std_offset_; }
  void clamp_log_std();

  struct Pass {
    MlpLayout::Cache encoder;
    Matrix features;
    MlpLayout::Cache actor;
    Matrix mean;
    std::array<MlpLayout::Cache, kNumCritics> critic;
    std::array<Matrix, kNumCritics> raw;  // 1 x batch, pre-sigmoid
    std::array<bool, kNumCritics> active{};
  };

  // Forward over a batch of observation columns for the actor and the heads
  // flagged in `heads`.
  void forward(const Matrix& obs, std::array<bool, kNumCritics> heads,
               Pass& pass) const;
  // Accumulates parameter gradients given d(loss)/d(mean) (may be null) and
  // d(loss)/d(raw head output) per active head (null entries skipped).
  // log-std gradients are the caller's job.
  void backward(const Pass& pass, const Matrix* d_mean,
                const std::array<const Matrix*, kNumCritics>& d_raw,
                Vector& grad) const;

  Matrix mean(const Matrix& obs) const;
  // Critic prediction (probability for a sigmoid constraint head).
  Vector value(Head head, const Matrix& obs) const;
  // kNumCritics x batch, all heads.
  Matrix values(const Matrix& obs) const;
  // Same with only the flagged heads evaluated; other rows are zero.
  Matrix values(const Matrix& obs, std::array<bool, kNumCritics> heads) const;

  // Overwrites the parameters of critic `to` with those of `from`.
  void copy_head(Head from, Head to);

  bool sigmoid_head(Head h) const {
    return h == Head::kConstraint && spec_.constraint_sigmoid;
  }

 private:
  Matrix features(const Matrix& obs, MlpLayout::Cache* cache) const;

  ModelSpec spec_;
  Vector params_;
  MlpLayout encoder_;
  MlpLayout actor_;
  std::array<MlpLayout, kNumCritics> critics_;
  std::size_t encoder_offset_ = 0;
  std::size_t actor_offset_ = 0;
  std::size_t log_std_offset_ = 0;
  std::array<std::size_t, kNumCritics> critic_offset_{};
  int feature_dim_ = 0;
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace cfharm

#endif  // CFHARM_MODEL_HPP_
