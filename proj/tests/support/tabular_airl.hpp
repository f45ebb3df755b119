#ifndef MMIRL_TESTS_TABULAR_AIRL_HPP_
#define MMIRL_TESTS_TABULAR_AIRL_HPP_

#include <array>
#include <cmath>
#include <vector>

#include "mmirl/adam.hpp"
#include "mmirl/numeric.hpp"
#include "mmirl/param_block.hpp"

namespace mmirl_tests {

// Exact tabular instantiation of the adversarial reward-recovery loop on a
// small finite MDP: soft value iteration as the forward solver, closed-form
// state-action occupancies, and exact-expectation discriminator gradients.
// Everything is enumerated; no sampling anywhere.
struct TabularMdp {
  static constexpr int S = 4;
  static constexpr int A = 2;
  // P[s][a][s']
  std::array<std::array<std::array<double, S>, A>, S> P{};
  std::array<double, S> reward_state{};  // true reward, state-only
  std::array<double, S> initial{};
  double gamma = 0.9;

  static TabularMdp chain() {
    TabularMdp m;
    for (int s = 0; s < S; ++s) {
      const int left = std::max(s - 1, 0);
      const int right = std::min(s + 1, S - 1);
      m.P[s][0][left] += 0.9;
      m.P[s][0][s] += 0.1;
      m.P[s][1][right] += 0.9;
      m.P[s][1][s] += 0.1;
    }
    // chosen so the optimal policy is non-constant: stay left at state 0,
    // head right everywhere else
    m.reward_state = {0.8, 0.0, 0.0, 1.0};
    m.initial = {0.25, 0.25, 0.25, 0.25};
    return m;
  }
};

using Policy = std::array<std::array<double, TabularMdp::A>, TabularMdp::S>;
using SaTable = std::array<std::array<double, TabularMdp::A>, TabularMdp::S>;

// Soft (MaxEnt) value iteration for reward r(s,a); returns the stationary
// softmax policy pi(a|s) = exp(Q(s,a) - V(s)).
inline Policy soft_value_iteration(const TabularMdp& m, const SaTable& r, int iters = 2000) {
  std::array<double, TabularMdp::S> v{};
  SaTable q{};
  for (int it = 0; it < iters; ++it) {
    for (int s = 0; s < TabularMdp::S; ++s)
      for (int a = 0; a < TabularMdp::A; ++a) {
        double next = 0.0;
        for (int s2 = 0; s2 < TabularMdp::S; ++s2) next += m.P[s][a][s2] * v[s2];
        q[s][a] = r[s][a] + m.gamma * next;
      }
    for (int s = 0; s < TabularMdp::S; ++s) {
      const double mx = std::max(q[s][0], q[s][1]);
      v[s] = mx + std::log(std::exp(q[s][0] - mx) + std::exp(q[s][1] - mx));
    }
  }
  Policy pi{};
  for (int s = 0; s < TabularMdp::S; ++s) {
    const double mx = std::max(q[s][0], q[s][1]);
    const double z = std::exp(q[s][0] - mx) + std::exp(q[s][1] - mx);
    for (int a = 0; a < TabularMdp::A; ++a) pi[s][a] = std::exp(q[s][a] - mx) / z;
  }
  return pi;
}

// Standard (hard) value iteration; returns argmax actions.
inline std::array<int, TabularMdp::S> hard_optimal_policy(const TabularMdp& m, const SaTable& r,
                                                          int iters = 2000) {
  std::array<double, TabularMdp::S> v{};
  SaTable q{};
  for (int it = 0; it < iters; ++it) {
    for (int s = 0; s < TabularMdp::S; ++s)
      for (int a = 0; a < TabularMdp::A; ++a) {
        double next = 0.0;
        for (int s2 = 0; s2 < TabularMdp::S; ++s2) next += m.P[s][a][s2] * v[s2];
        q[s][a] = r[s][a] + m.gamma * next;
      }
    for (int s = 0; s < TabularMdp::S; ++s) v[s] = std::max(q[s][0], q[s][1]);
  }
  std::array<int, TabularMdp::S> out{};
  for (int s = 0; s < TabularMdp::S; ++s) out[s] = q[s][1] > q[s][0] ? 1 : 0;
  return out;
}

// Discounted state-action occupancy under pi from the initial distribution.
inline SaTable occupancy(const TabularMdp& m, const Policy& pi, int iters = 4000) {
  std::array<double, TabularMdp::S> d = m.initial;
  std::array<double, TabularMdp::S> acc{};
  double weight = 1.0 - m.gamma;
  for (int it = 0; it < iters; ++it) {
    for (int s = 0; s < TabularMdp::S; ++s) acc[s] += weight * d[s];
    std::array<double, TabularMdp::S> next{};
    for (int s = 0; s < TabularMdp::S; ++s)
      for (int a = 0; a < TabularMdp::A; ++a)
        for (int s2 = 0; s2 < TabularMdp::S; ++s2) next[s2] += d[s] * pi[s][a] * m.P[s][a][s2];
    d = next;
    weight *= m.gamma;
  }
  SaTable rho{};
  for (int s = 0; s < TabularMdp::S; ++s)
    for (int a = 0; a < TabularMdp::A; ++a) rho[s][a] = acc[s] * pi[s][a];
  return rho;
}

struct TabularRecovery {
  SaTable recovered_reward{};
  std::array<int, TabularMdp::S> optimal_under_recovered{};
  std::array<int, TabularMdp::S> optimal_under_true{};
  double final_disc_gap = 0.0;  // max |D - 0.5| at the end
};

// The adversarial loop with exact (enumerated) policy evaluation in the
// inner loop: alternate soft-optimal generator under the current reward
// with exact-gradient discriminator ascent.
inline TabularRecovery tabular_airl_recover(const TabularMdp& m, int outer_iters = 3000,
                                            double lr = 5e-3) {
  SaTable r_true{};
  for (int s = 0; s < TabularMdp::S; ++s)
    for (int a = 0; a < TabularMdp::A; ++a) r_true[s][a] = m.reward_state[s];

  const Policy expert = soft_value_iteration(m, r_true);
  const SaTable rho_e = occupancy(m, expert);

  mmirl::ParamBlock theta;
  theta.allocate(TabularMdp::S, TabularMdp::A);
  mmirl::AdamState adam(theta.size());
  mmirl::AdamConfig acfg;
  acfg.lr = lr;

  auto reward_of = [&theta](int s, int a) {
    return theta.values()[static_cast<std::size_t>(s * TabularMdp::A + a)];
  };

  double disc_gap = 0.0;
  for (int it = 0; it < outer_iters; ++it) {
    SaTable r_hat{};
    for (int s = 0; s < TabularMdp::S; ++s)
      for (int a = 0; a < TabularMdp::A; ++a) r_hat[s][a] = reward_of(s, a);
    const Policy gen = soft_value_iteration(m, r_hat, 400);
    const SaTable rho_g = occupancy(m, gen, 1000);

    theta.zero_grads();
    disc_gap = 0.0;
    for (int s = 0; s < TabularMdp::S; ++s)
      for (int a = 0; a < TabularMdp::A; ++a) {
        const double h = reward_of(s, a) - std::log(gen[s][a]);
        const double d = mmirl::sigmoid(h);
        disc_gap = std::max(disc_gap, std::abs(d - 0.5));
        // descend -rho_e log D - rho_g log(1-D)
        theta.grads()[static_cast<std::size_t>(s * TabularMdp::A + a)] =
            rho_e[s][a] * (d - 1.0) + rho_g[s][a] * d;
      }
    adam.step(theta, acfg);
  }

  TabularRecovery out;
  for (int s = 0; s < TabularMdp::S; ++s)
    for (int a = 0; a < TabularMdp::A; ++a) out.recovered_reward[s][a] = reward_of(s, a);
  out.optimal_under_recovered = hard_optimal_policy(m, out.recovered_reward);
  out.optimal_under_true = hard_optimal_policy(m, r_true);
  out.final_disc_gap = disc_gap;
  return out;
}

}  // namespace mmirl_tests

#endif  // MMIRL_TESTS_TABULAR_AIRL_HPP_
