#ifndef MMIRL_EXPERT_TRAIN_HPP_
#define MMIRL_EXPERT_TRAIN_HPP_

#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mmirl/checkpoint.hpp"
#include "mmirl/config.hpp"
#include "mmirl/env.hpp"
#include "mmirl/metrics.hpp"
#include "mmirl/numeric.hpp"
#include "mmirl/ppo.hpp"
#include "mmirl/rollout.hpp"

namespace mmirl {

struct ExpertTrainStats {
  int iteration = 0;
  double return_mean = 0.0;
  double return_std = 0.0;
  double entropy = 0.0;
  double kl = 0.0;
  double clip_fraction = 0.0;
  int dropped_episodes = 0;
  double wall_time_s = 0.0;
};

/// Forward RL on the simulator's true reward. Each episode draws a random
/// operating mode and the policy is conditioned on that mode's one-hot, so
/// a single network serves as the per-mode expert family.
class ExpertTrainer {
 public:
  explicit ExpertTrainer(RunConfig cfg) : cfg_(std::move(cfg)), env_(make_env(cfg_)) {
    const EnvSpec& spec = env_->spec();
    std::vector<int> hidden(static_cast<std::size_t>(cfg_.training.hidden_layers),
                            cfg_.training.hidden_width);
    PolicyLayout layout;
    layout.obs_dim = spec.state_dim + spec.mode_count;
    layout.act_dim = spec.action_dim;
    layout.hidden = hidden;
    layout.log_std_init = cfg_.training.log_std_init;
    layout.log_std_min = cfg_.training.log_std_min;
    layout.log_std_max = cfg_.training.log_std_max;
    layout.act_low = spec.action_low;
    layout.act_high = spec.action_high;

    PpoConfig ppo;
    ppo.gamma = cfg_.training.gamma;
    ppo.gae_lambda = cfg_.training.gae_lambda;
    ppo.clip_ratio = cfg_.training.clip_ratio;
    ppo.epochs = cfg_.training.ppo_epochs;
    ppo.minibatch = cfg_.training.minibatch;
    ppo.lr_policy = cfg_.training.lr_policy;
    ppo.lr_value = cfg_.training.lr_value;
    ppo.ent_coef = cfg_.training.ent_coef;
    ppo.target_kl = cfg_.training.target_kl;
    ppo.grad_clip = cfg_.training.grad_clip;
    ppo.workers = cfg_.training.workers;

    agent_ = std::make_unique<PolicyAgent>(layout, ppo, seed_chain(cfg_.training.seed, 0xE9));
  }

  int iteration() const { return iteration_; }
  PolicyAgent& agent() { return *agent_; }
  const Env& env() const { return *env_; }

  ExpertTrainStats train_iteration() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t it_seed = seed_chain(cfg_.training.seed, static_cast<std::uint64_t>(iteration_), 0xE0);

    RolloutOptions opt;
    opt.n_steps = cfg_.training.rollout_steps;
    opt.seed = seed_chain(it_seed, 3);
    opt.workers = cfg_.training.workers;
    const int modes = env_->spec().mode_count;
    opt.env_mode_fn = [modes](int, Rng& rng) { return rng.uniform_int(modes); };
    opt.z_follows_env_mode = true;
    RolloutBatch batch = collect_rollouts(agent_->policy(), *env_, opt);

    ExpertTrainStats stats;
    stats.iteration = iteration_;
    stats.dropped_episodes = batch.dropped_episodes;
    std::vector<double> returns;
    returns.reserve(batch.episodes.size());
    for (const auto& ep : batch.episodes) {
      double r = 0.0;
      for (double v : ep.env_rewards) r += v;
      returns.push_back(r);
    }
    stats.return_mean = mean_of(returns);
    stats.return_std = stddev_of(returns);

    const UpdateStats pstats = agent_->update(batch, seed_chain(it_seed, 7));
    stats.entropy = pstats.entropy;
    stats.kl = pstats.kl;
    stats.clip_fraction = pstats.clip_fraction;
    ++iteration_;
    stats.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return stats;
  }

  Checkpoint make_checkpoint() const {
    Checkpoint ckpt;
    ckpt.meta["kind"] = "expert";
    ckpt.meta["env_id"] = env_->spec().id;
    ckpt.meta["iteration"] = std::to_string(iteration_);
    ckpt.meta["seed"] = std::to_string(cfg_.training.seed);
    ckpt.meta["config_hash"] = config_hash(cfg_);
    ckpt.meta["mode_count"] = std::to_string(env_->spec().mode_count);
    agent_->append_blocks("agent", ckpt.blocks);
    return ckpt;
  }

  void restore(const Checkpoint& ckpt) {
    agent_->restore_blocks(ckpt, "agent");
    iteration_ = std::stoi(ckpt.meta_or("iteration", "0"));
  }

  MetricRecord metrics_record(const ExpertTrainStats& s) const {
    return {
        {"step", static_cast<long long>(s.iteration)},
        {"return_mean", s.return_mean},
        {"return_std", s.return_std},
        {"entropy", s.entropy},
        {"kl", s.kl},
        {"clip_fraction", s.clip_fraction},
        {"dropped_episodes", static_cast<long long>(s.dropped_episodes)},
        {"wall_time_s", s.wall_time_s},
    };
  }

 private:
  RunConfig cfg_;
  std::unique_ptr<Env> env_;
  std::unique_ptr<PolicyAgent> agent_;
  int iteration_ = 0;
};

/// Rebuilds a policy agent shaped for `cfg` and loads checkpoint weights.
inline std::unique_ptr<PolicyAgent> load_policy_agent(const RunConfig& cfg, const Checkpoint& ckpt) {
  std::unique_ptr<Env> env = make_env(cfg);
  const EnvSpec& spec = env->spec();
  std::vector<int> hidden(static_cast<std::size_t>(cfg.training.hidden_layers), cfg.training.hidden_width);
  PolicyLayout layout;
  layout.obs_dim = spec.state_dim + spec.mode_count;
  layout.act_dim = spec.action_dim;
  layout.hidden = hidden;
  layout.log_std_init = cfg.training.log_std_init;
  layout.log_std_min = cfg.training.log_std_min;
  layout.log_std_max = cfg.training.log_std_max;
  layout.act_low = spec.action_low;
  layout.act_high = spec.action_high;
  PpoConfig ppo;
  ppo.workers = cfg.training.workers;
  auto agent = std::make_unique<PolicyAgent>(layout, ppo, 0);
  agent->restore_blocks(ckpt, "agent");
  return agent;
}

}  // namespace mmirl

#endif  // MMIRL_EXPERT_TRAIN_HPP_
