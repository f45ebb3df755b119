#ifndef MMIRL_ODE_HPP_
#define MMIRL_ODE_HPP_

#include <array>
#include <cstddef>
#include <span>

namespace mmirl {

/// Classical fixed-step fourth-order Runge-Kutta over a time span split into
/// equal substeps. RHS signature: f(y, dydt) with both spans of length N.
template <std::size_t N, class Rhs>
inline void rk4_advance(std::array<double, N>& y, double t_len, int substeps, Rhs&& f) {
  const double h = t_len / static_cast<double>(substeps);
  std::array<double, N> k1{}, k2{}, k3{}, k4{}, tmp{};
  for (int s = 0; s < substeps; ++s) {
    f(y, k1);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    f(tmp, k2);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    f(tmp, k3);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * k3[i];
    f(tmp, k4);
    for (std::size_t i = 0; i < N; ++i)
      y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
}

}  // namespace mmirl

#endif  // MMIRL_ODE_HPP_
