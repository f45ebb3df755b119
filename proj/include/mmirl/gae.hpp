#ifndef MMIRL_GAE_HPP_
#define MMIRL_GAE_HPP_

#include <span>
#include <stdexcept>
#include <vector>

namespace mmirl {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;  // advantages + values
};

/// Generalized advantage estimation over one episode.
/// values has the same length as rewards; bootstrap_value stands in for
/// V(s_T) past the last transition (0 for completed episodes).
inline GaeResult gae(std::span<const double> rewards, std::span<const double> values,
                     double gamma, double lambda, double bootstrap_value = 0.0) {
  if (rewards.size() != values.size()) throw std::invalid_argument("gae: length mismatch");
  const int n = static_cast<int>(rewards.size());
  GaeResult out;
  out.advantages.resize(static_cast<std::size_t>(n));
  out.returns.resize(static_cast<std::size_t>(n));
  double adv = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    const double next_value = (t == n - 1) ? bootstrap_value : values[static_cast<std::size_t>(t + 1)];
    const double delta = rewards[static_cast<std::size_t>(t)] + gamma * next_value - values[static_cast<std::size_t>(t)];
    adv = delta + gamma * lambda * adv;
    out.advantages[static_cast<std::size_t>(t)] = adv;
    out.returns[static_cast<std::size_t>(t)] = adv + values[static_cast<std::size_t>(t)];
  }
  return out;
}

}  // namespace mmirl

#endif  // MMIRL_GAE_HPP_
