#ifndef MMIRL_NUMERIC_HPP_
#define MMIRL_NUMERIC_HPP_

#include <algorithm>
#include <cmath>
#include <span>

namespace mmirl {

inline double sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow
inline double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

// log(sigmoid(x)) = -softplus(-x)
inline double log_sigmoid(double x) { return -softplus(-x); }

inline double clamp(double x, double lo, double hi) { return std::min(hi, std::max(lo, x)); }

inline bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double stddev_of(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace mmirl

#endif  // MMIRL_NUMERIC_HPP_
