#ifndef CFHARM_COMMON_HPP_
#define CFHARM_COMMON_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace cfharm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// All randomness flows through explicitly seeded 64-bit Mersenne streams.
using Rng = std::mt19937_64;

// Raised when a caller breaks an operation's precondition (e.g. stepping a
// finished episode).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Raised when a loss or target goes non-finite during training.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double standard_normal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Derives an independent stream for a sub-component (per environment, per
// evaluation state) from a root seed.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t salt = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(salt),
                    static_cast<std::uint32_t>(salt >> 32)};
  return Rng(seq);
}

inline double relu(double x) { return x > 0.0 ? x : 0.0; }

inline double sign_of(double x) { return (x > 0.0) - (x < 0.0); }

inline double wrap_angle(double a) {
  constexpr double kPi = 3.14159265358979323846;
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a - kPi;
}

}  // namespace cfharm

#endif  // CFHARM_COMMON_HPP_
