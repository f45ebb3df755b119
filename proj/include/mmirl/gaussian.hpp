#ifndef MMIRL_GAUSSIAN_HPP_
#define MMIRL_GAUSSIAN_HPP_

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "mmirl/numeric.hpp"

namespace mmirl {

/// Diagonal Gaussian over actions: per-input mean plus a state-independent
/// learned log standard deviation.
struct GaussianHead {
  std::vector<double> mean;
  std::vector<double> log_std;
};

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;
inline const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

inline double gaussian_log_prob(std::span<const double> mean, std::span<const double> log_std,
                                std::span<const double> x) {
  if (mean.size() != x.size() || mean.size() != log_std.size())
    throw std::invalid_argument("gaussian_log_prob: dimension mismatch");
  double lp = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = (x[i] - mean[i]) * std::exp(-log_std[i]);
    lp += -0.5 * z * z - log_std[i] - kLogSqrt2Pi;
  }
  return lp;
}

inline double gaussian_log_prob(const GaussianHead& head, std::span<const double> action) {
  return gaussian_log_prob(head.mean, head.log_std, action);
}

/// Closed-form entropy: sum_i (log_std_i + 0.5 ln(2*pi*e)).
inline double gaussian_entropy(std::span<const double> log_std) {
  double h = 0.0;
  for (double ls : log_std) h += ls + 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);
  return h;
}

inline double gaussian_entropy(const GaussianHead& head) { return gaussian_entropy(head.log_std); }

// d log N(x; mean, std) / d mean_i = (x_i - mean_i) / std_i^2
inline void gaussian_dlogp_dmean(std::span<const double> mean, std::span<const double> log_std,
                                 std::span<const double> x, std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double inv_var = std::exp(-2.0 * log_std[i]);
    out[i] = (x[i] - mean[i]) * inv_var;
  }
}

// d log N(x; mean, std) / d log_std_i = ((x_i - mean_i)/std_i)^2 - 1
inline void gaussian_dlogp_dlogstd(std::span<const double> mean, std::span<const double> log_std,
                                   std::span<const double> x, std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = (x[i] - mean[i]) * std::exp(-log_std[i]);
    out[i] = z * z - 1.0;
  }
}

// --- tanh squashing between action bounds ------------------------------
//
// Pre-squash variable v maps to u = lo + (hi-lo) * (tanh(v)+1)/2. The
// log-density correction per dimension is log((hi-lo)/2) + log(1-tanh^2 v),
// with log(1-tanh^2 v) evaluated as 2(ln 2 - v - softplus(-2v)) to stay
// finite for large |v|.

inline double squash_to_bounds(double v, double lo, double hi) {
  return lo + (hi - lo) * 0.5 * (std::tanh(v) + 1.0);
}

inline double unsquash_from_bounds(double u, double lo, double hi) {
  double t = 2.0 * (u - lo) / (hi - lo) - 1.0;
  t = clamp(t, -1.0 + 1e-9, 1.0 - 1e-9);
  return std::atanh(t);
}

inline double squash_log_det_dim(double v, double lo, double hi) {
  const double log_one_minus_tanh_sq = 2.0 * (std::log(2.0) - v - softplus(-2.0 * v));
  return std::log(0.5 * (hi - lo)) + log_one_minus_tanh_sq;
}

inline double squash_log_det(std::span<const double> v, std::span<const double> lo,
                             std::span<const double> hi) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += squash_log_det_dim(v[i], lo[i], hi[i]);
  return s;
}

}  // namespace mmirl

#endif  // MMIRL_GAUSSIAN_HPP_
