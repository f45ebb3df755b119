#ifndef MMIRL_DEMOS_HPP_
#define MMIRL_DEMOS_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmirl/cstr.hpp"
#include "mmirl/env.hpp"
#include "mmirl/parallel.hpp"
#include "mmirl/pi_controller.hpp"
#include "mmirl/policy.hpp"
#include "mmirl/rollout.hpp"
#include "mmirl/rng.hpp"
#include "mmirl/trajectory.hpp"

namespace mmirl {

/// Anything that can close the loop on an environment for one episode.
class Expert {
 public:
  virtual ~Expert() = default;
  virtual std::string kind() const = 0;
  // fresh controller state for a new episode
  virtual void begin_episode(int mode) = 0;
  /// Action given the raw observation; may exceed bounds (caller clips and
  /// counts).
  virtual std::vector<double> act(const Env& env, std::span<const double> obs_raw, Rng& rng) = 0;
};

/// PI feedback expert for the CSTR; reads T and the setpoint from the raw
/// observation [Ca, T, Tc, b, Tset - T].
class PiExpert final : public Expert {
 public:
  PiExpert(double kc, double tau_i, double u0, double dt) : ctrl_(kc, tau_i, u0), dt_(dt) {}

  std::string kind() const override { return "pi"; }
  void begin_episode(int) override { ctrl_.reset(); }

  std::vector<double> act(const Env&, std::span<const double> obs_raw, Rng&) override {
    if (obs_raw.size() != 5) throw std::invalid_argument("PiExpert: expected CSTR observation");
    const double error = -obs_raw[4];  // T - Tset
    return {ctrl_.control(error, dt_)};
  }

 private:
  PiController ctrl_;
  double dt_;
};

/// A trained policy rolled out stochastically, conditioned on the true mode.
class PolicyExpert final : public Expert {
 public:
  PolicyExpert(const GaussianPolicy& policy, int mode_count)
      : policy_(policy), mode_count_(mode_count) {}

  std::string kind() const override { return "policy"; }
  void begin_episode(int mode) override { mode_ = mode; }

  std::vector<double> act(const Env& env, std::span<const double>, Rng& rng) override {
    const std::vector<double> aug = augment_observation(env.observe(), mode_, mode_count_);
    return policy_.sample(aug, rng).action;
  }

 private:
  const GaussianPolicy& policy_;
  int mode_count_;
  int mode_ = 0;
};

struct DemoConfig {
  int trajectories_per_mode = 1;
  std::uint64_t shuffle_seed = 0;
  std::uint64_t rollout_seed = 0;
  bool store_rewards = true;
  int workers = 1;
};

struct DemoResult {
  DemoDataset dataset;
  long clipped_actions = 0;  // expert outputs that had to be clipped to bounds
};

/// Rolls out trajectories_per_mode episodes per mode, records raw (x, u)
/// pairs plus the evaluation-only sidecar, concatenates across modes and
/// applies a seeded shuffle — the stand-in for mixed historical data.
inline DemoResult generate_demos(const Env& env_proto,
                                 const std::function<std::unique_ptr<Expert>()>& make_expert,
                                 const DemoConfig& cfg) {
  const EnvSpec& spec = env_proto.spec();
  const int modes = spec.mode_count;
  const int total = modes * cfg.trajectories_per_mode;
  DemoResult result;
  result.dataset.resize(static_cast<std::size_t>(total));
  std::vector<long> clipped(static_cast<std::size_t>(total), 0);

  // every task owns a fresh expert and env clone, so episodes are independent
  parallel_tasks(total, cfg.workers, [&](int idx) {
    const int mode = idx / cfg.trajectories_per_mode;
    const std::uint64_t ep_seed = seed_chain(cfg.rollout_seed, static_cast<std::uint64_t>(idx));
    Rng rng(seed_chain(ep_seed, 7));
    std::unique_ptr<Env> env = env_proto.clone();
    std::unique_ptr<Expert> expert = make_expert();
    env->reset(mode, seed_chain(ep_seed, 9));
    expert->begin_episode(mode);

    TrajectoryRecord rec;
    rec.env_id = spec.id;
    Sidecar sc;
    sc.mode_label = mode;
    sc.expert_kind = expert->kind();
    while (!env->done()) {
      const std::vector<double> raw = env->observe_raw();
      std::vector<double> u = expert->act(*env, raw, rng);
      const std::vector<double> u_clipped = clip_action(u, spec);
      for (std::size_t i = 0; i < u.size(); ++i)
        if (u[i] != u_clipped[i]) ++clipped[static_cast<std::size_t>(idx)];
      const StepResult res = env->step(u_clipped);
      if (res.aborted) throw std::runtime_error("generate_demos: environment aborted: " + res.abort_reason);
      rec.traj.states.push_back(raw);
      rec.traj.actions.push_back(u_clipped);
      if (cfg.store_rewards) sc.rewards.push_back(res.reward);
    }
    rec.sidecar = std::move(sc);
    result.dataset[static_cast<std::size_t>(idx)] = std::move(rec);
  });

  for (long c : clipped) result.clipped_actions += c;

  // seeded permutation across the concatenated modes
  Rng shuffle_rng(cfg.shuffle_seed);
  const std::vector<int> perm = shuffle_rng.permutation(total);
  DemoDataset shuffled(static_cast<std::size_t>(total));
  for (int i = 0; i < total; ++i)
    shuffled[static_cast<std::size_t>(i)] = std::move(result.dataset[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
  result.dataset = std::move(shuffled);
  return result;
}

}  // namespace mmirl

#endif  // MMIRL_DEMOS_HPP_
