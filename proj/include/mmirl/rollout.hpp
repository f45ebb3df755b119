#ifndef MMIRL_ROLLOUT_HPP_
#define MMIRL_ROLLOUT_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "mmirl/env.hpp"
#include "mmirl/parallel.hpp"
#include "mmirl/policy.hpp"
#include "mmirl/rng.hpp"

namespace mmirl {

/// One completed episode of experience. The latent context z is fixed for
/// the whole episode and appended to every observation as a one-hot block.
struct EpisodeData {
  int env_mode = 0;
  int z = 0;
  bool aborted = false;
  std::vector<std::vector<double>> obs_raw;   // pre-normalization observations
  std::vector<std::vector<double>> obs_aug;   // normalized obs ++ one-hot z
  std::vector<std::vector<double>> actions;   // bounded actions u
  std::vector<std::vector<double>> presquash; // sampled v
  std::vector<double> log_probs;
  std::vector<double> env_rewards;    // simulator's true reward (diagnostics)
  std::vector<double> train_rewards;  // reward the forward solver optimizes
  std::vector<double> final_obs_raw;  // raw observation after the last step

  std::size_t length() const { return actions.size(); }
};

struct RolloutBatch {
  std::vector<EpisodeData> episodes;
  int mode_count = 0;
  int dropped_episodes = 0;

  std::size_t total_steps() const {
    std::size_t n = 0;
    for (const auto& ep : episodes) n += ep.length();
    return n;
  }
};

struct RolloutOptions {
  int n_steps = 0;          // collect at least this many transitions
  std::uint64_t seed = 0;   // per-iteration seed; episodes derive their own
  int workers = 1;
  // env mode for each episode (sampled by nature, not the agent)
  std::function<int(int episode_index, Rng&)> env_mode_fn;
  // latent context; sees the episode index only (independent of env mode)
  std::function<int(int episode_index, Rng&)> z_fn;
  bool z_follows_env_mode = false;  // expert training: z = true mode
  bool deterministic = false;       // evaluation: squashed mean actions
};

inline std::vector<double> augment_observation(std::span<const double> obs_norm, int z, int mode_count) {
  std::vector<double> out(obs_norm.begin(), obs_norm.end());
  out.resize(obs_norm.size() + static_cast<std::size_t>(mode_count), 0.0);
  out[obs_norm.size() + static_cast<std::size_t>(z)] = 1.0;
  return out;
}

/// Rolls out whole episodes until at least n_steps transitions have been
/// collected. Episodes are independent tasks: each derives every random
/// stream from (seed, episode index), so the batch is bit-identical for any
/// worker count. Aborted episodes are dropped and counted.
inline RolloutBatch collect_rollouts(const GaussianPolicy& policy, const Env& env_proto,
                                     const RolloutOptions& opt) {
  const EnvSpec& spec = env_proto.spec();
  const int horizon = spec.horizon;
  const int n_episodes = (opt.n_steps + horizon - 1) / horizon;
  const int mode_count = spec.mode_count;

  RolloutBatch batch;
  batch.mode_count = mode_count;
  batch.episodes.resize(static_cast<std::size_t>(n_episodes));

  parallel_tasks(n_episodes, opt.workers, [&](int e) {
    const std::uint64_t ep_seed = seed_chain(opt.seed, static_cast<std::uint64_t>(e));
    Rng mode_rng(seed_chain(ep_seed, 101));
    Rng z_rng(seed_chain(ep_seed, 102));
    Rng action_rng(seed_chain(ep_seed, 103));

    EpisodeData ep;
    ep.env_mode = opt.env_mode_fn ? opt.env_mode_fn(e, mode_rng) : 0;
    ep.z = opt.z_follows_env_mode ? ep.env_mode : (opt.z_fn ? opt.z_fn(e, z_rng) : 0);

    std::unique_ptr<Env> env = env_proto.clone();
    env->reset(ep.env_mode, seed_chain(ep_seed, 104));
    ep.obs_raw.reserve(static_cast<std::size_t>(horizon));
    while (!env->done()) {
      const std::vector<double> raw = env->observe_raw();
      const std::vector<double> aug = augment_observation(env->observe(), ep.z, mode_count);
      std::vector<double> u, v;
      double lp = 0.0;
      if (opt.deterministic) {
        u = policy.mean_action(aug);
        v.resize(u.size());
        for (std::size_t i = 0; i < u.size(); ++i)
          v[i] = unsquash_from_bounds(u[i], spec.action_low[i], spec.action_high[i]);
        lp = policy.log_prob_presquash(aug, v);
      } else {
        auto s = policy.sample(aug, action_rng);
        u = std::move(s.action);
        v = std::move(s.presquash);
        lp = s.log_prob;
      }
      const StepResult res = env->step(u);
      if (res.aborted) {
        ep.aborted = true;
        break;
      }
      ep.obs_raw.push_back(raw);
      ep.obs_aug.push_back(aug);
      ep.actions.push_back(std::move(u));
      ep.presquash.push_back(std::move(v));
      ep.log_probs.push_back(lp);
      ep.env_rewards.push_back(res.reward);
      ep.train_rewards.push_back(res.reward);
    }
    if (!ep.aborted) ep.final_obs_raw = env->observe_raw();
    batch.episodes[static_cast<std::size_t>(e)] = std::move(ep);
  });

  // drop aborted episodes, preserving order
  std::vector<EpisodeData> kept;
  kept.reserve(batch.episodes.size());
  for (auto& ep : batch.episodes) {
    if (ep.aborted)
      ++batch.dropped_episodes;
    else
      kept.push_back(std::move(ep));
  }
  batch.episodes = std::move(kept);
  if (batch.episodes.empty())
    throw std::runtime_error("collect_rollouts: every episode aborted");
  return batch;
}

}  // namespace mmirl

#endif  // MMIRL_ROLLOUT_HPP_
