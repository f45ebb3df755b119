#ifndef MMIRL_TESTS_DIRECT_SEARCH_HPP_
#define MMIRL_TESTS_DIRECT_SEARCH_HPP_

#include <array>
#include <vector>

#include "mmirl/bioreactor.hpp"
#include "mmirl/ode.hpp"
#include "mmirl/parallel.hpp"
#include "mmirl/rng.hpp"

namespace mmirl_tests {

// Direct-search oracle for the best achievable terminal product
// concentration: random piecewise-constant 20-step action sequences followed
// by coordinate refinement. Independent of any learned policy.
struct DirectSearchResult {
  double best_terminal_y2 = 0.0;
  std::vector<std::array<double, 2>> best_sequence;
};

inline double bioreactor_terminal_y2(const std::vector<std::array<double, 2>>& seq, double k,
                                     double dt = 0.05, int substeps = 10) {
  std::array<double, 2> y = {1.0, 0.0};
  for (const auto& u : seq) {
    mmirl::rk4_advance(y, dt, substeps, [&](const std::array<double, 2>& yy, std::array<double, 2>& dy) {
      mmirl::bioreactor_rhs(yy, u, k, dy);
    });
  }
  return y[1];
}

inline DirectSearchResult direct_search_best_y2(double k, int horizon = 20, int random_trials = 10000,
                                                int refine_sweeps = 4, std::uint64_t seed = 20240901,
                                                int workers = 4) {
  const int chunk_count = 16;
  std::vector<DirectSearchResult> chunk_best(chunk_count);
  mmirl::parallel_tasks(chunk_count, workers, [&](int c) {
    DirectSearchResult best;
    best.best_terminal_y2 = -1.0;
    const int per_chunk = (random_trials + chunk_count - 1) / chunk_count;
    for (int trial = 0; trial < per_chunk; ++trial) {
      mmirl::Rng rng(mmirl::seed_chain(seed, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(trial)));
      const int segments = 1 + rng.uniform_int(4);
      std::vector<int> bounds;
      for (int s = 0; s + 1 < segments; ++s) bounds.push_back(rng.uniform_int(horizon + 1));
      std::sort(bounds.begin(), bounds.end());
      bounds.push_back(horizon);
      std::vector<std::array<double, 2>> seq(static_cast<std::size_t>(horizon));
      int start = 0;
      for (int b : bounds) {
        const std::array<double, 2> value = {rng.uniform(0.0, 5.0), rng.uniform(0.0, 5.0)};
        for (int t = start; t < b; ++t) seq[static_cast<std::size_t>(t)] = value;
        start = b;
      }
      const double y2 = bioreactor_terminal_y2(seq, k);
      if (y2 > best.best_terminal_y2) {
        best.best_terminal_y2 = y2;
        best.best_sequence = seq;
      }
    }
    chunk_best[static_cast<std::size_t>(c)] = std::move(best);
  });

  DirectSearchResult best = chunk_best[0];
  for (const auto& cb : chunk_best)
    if (cb.best_terminal_y2 > best.best_terminal_y2) best = cb;

  // coordinate refinement: grid line search over each action coordinate
  for (int sweep = 0; sweep < refine_sweeps; ++sweep) {
    for (int t = 0; t < horizon; ++t) {
      for (int d = 0; d < 2; ++d) {
        double best_val = best.best_sequence[static_cast<std::size_t>(t)][static_cast<std::size_t>(d)];
        for (int g = 0; g <= 25; ++g) {
          const double cand = 5.0 * static_cast<double>(g) / 25.0;
          auto seq = best.best_sequence;
          seq[static_cast<std::size_t>(t)][static_cast<std::size_t>(d)] = cand;
          const double y2 = bioreactor_terminal_y2(seq, k);
          if (y2 > best.best_terminal_y2) {
            best.best_terminal_y2 = y2;
            best_val = cand;
          }
        }
        best.best_sequence[static_cast<std::size_t>(t)][static_cast<std::size_t>(d)] = best_val;
      }
    }
  }
  return best;
}

}  // namespace mmirl_tests

#endif  // MMIRL_TESTS_DIRECT_SEARCH_HPP_
