#ifndef MMIRL_PPO_HPP_
#define MMIRL_PPO_HPP_

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "mmirl/adam.hpp"
#include "mmirl/checkpoint.hpp"
#include "mmirl/gae.hpp"
#include "mmirl/gaussian.hpp"
#include "mmirl/mlp.hpp"
#include "mmirl/numeric.hpp"
#include "mmirl/parallel.hpp"
#include "mmirl/policy.hpp"
#include "mmirl/rollout.hpp"

namespace mmirl {

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_ratio = 0.2;
  int epochs = 10;
  int minibatch = 256;
  double lr_policy = 3e-4;
  double lr_value = 1e-3;
  double ent_coef = 0.005;
  double target_kl = 0.02;
  double grad_clip = 0.5;
  int workers = 1;
};

struct UpdateStats {
  double kl = 0.0;
  double clip_fraction = 0.0;
  double entropy = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  int epochs_run = 0;
  bool kl_abort = false;
};

/// Flattened per-transition views over a rollout batch, with advantages
/// normalized to zero mean and unit variance across the whole batch.
struct TrainingArrays {
  std::vector<const std::vector<double>*> obs;
  std::vector<const std::vector<double>*> presquash;
  std::vector<double> old_log_probs;
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// MaxEnt forward solver: clipped-surrogate policy gradient with a fitted
/// value baseline and an entropy bonus.
class PolicyAgent {
 public:
  PolicyAgent(PolicyLayout layout, PpoConfig cfg, std::uint64_t init_seed)
      : cfg_(cfg), policy_(std::move(layout)) {
    std::vector<int> widths = policy_.layout().hidden;
    widths.push_back(1);
    value_net_ = Mlp(value_block_, policy_.layout().obs_dim, widths);
    Rng rng(seed_chain(init_seed, 0xA6E7));
    policy_.init(rng, 0.01);
    value_net_.init_xavier(rng, 1.0);
  }

  const PpoConfig& config() const { return cfg_; }
  PpoConfig& config() { return cfg_; }
  GaussianPolicy& policy() { return policy_; }
  const GaussianPolicy& policy() const { return policy_; }
  ParamBlock& value_block() { return value_block_; }

  double value(std::span<const double> obs_aug) const { return value_net_.forward(obs_aug)[0]; }

  /// Computes values + GAE per episode, flattens, and normalizes advantages
  /// over the batch (zero mean, unit variance).
  TrainingArrays prepare(const RolloutBatch& batch) const {
    TrainingArrays arr;
    const std::size_t total = batch.total_steps();
    arr.obs.reserve(total);
    arr.presquash.reserve(total);
    arr.old_log_probs.reserve(total);
    arr.advantages.reserve(total);
    arr.returns.reserve(total);

    std::vector<GaeResult> per_episode(batch.episodes.size());
    parallel_tasks(static_cast<int>(batch.episodes.size()), cfg_.workers, [&](int e) {
      const EpisodeData& ep = batch.episodes[static_cast<std::size_t>(e)];
      std::vector<double> values(ep.length());
      for (std::size_t t = 0; t < ep.length(); ++t) values[t] = value(ep.obs_aug[t]);
      per_episode[static_cast<std::size_t>(e)] =
          gae(ep.train_rewards, values, cfg_.gamma, cfg_.gae_lambda, 0.0);
    });

    for (std::size_t e = 0; e < batch.episodes.size(); ++e) {
      const EpisodeData& ep = batch.episodes[e];
      for (std::size_t t = 0; t < ep.length(); ++t) {
        arr.obs.push_back(&ep.obs_aug[t]);
        arr.presquash.push_back(&ep.presquash[t]);
        arr.old_log_probs.push_back(ep.log_probs[t]);
        arr.advantages.push_back(per_episode[e].advantages[t]);
        arr.returns.push_back(per_episode[e].returns[t]);
      }
    }

    // batch-level normalization (population variance); a zero-variance
    // batch normalizes to exactly zero
    bool all_equal = true;
    for (double a : arr.advantages)
      if (a != arr.advantages.front()) {
        all_equal = false;
        break;
      }
    if (all_equal) {
      for (double& a : arr.advantages) a = 0.0;
      return arr;
    }
    double mean = 0.0;
    for (double a : arr.advantages) mean += a;
    mean /= static_cast<double>(arr.advantages.size());
    double var = 0.0;
    for (double a : arr.advantages) var += (a - mean) * (a - mean);
    var /= static_cast<double>(arr.advantages.size());
    const double inv = 1.0 / (std::sqrt(var) + 1e-8);
    for (double& a : arr.advantages) a = (a - mean) * inv;
    return arr;
  }

  UpdateStats update(const RolloutBatch& batch, std::uint64_t update_seed) {
    const TrainingArrays arr = prepare(batch);
    const int n = static_cast<int>(arr.obs.size());
    const int act_dim = policy_.layout().act_dim;
    const std::size_t ls_off = policy_.log_std_offset();

    std::vector<std::vector<double>> pgrad_chunks(kGradChunks,
                                                  std::vector<double>(policy_.block().size(), 0.0));
    std::vector<std::vector<double>> vgrad_chunks(kGradChunks,
                                                  std::vector<double>(value_block_.size(), 0.0));
    struct ChunkStats {
      double kl_sum = 0.0, pg_sum = 0.0, v_sum = 0.0;
      long clipped = 0;
    };
    std::vector<ChunkStats> stats_chunks(kGradChunks);

    UpdateStats stats;
    double kl_epoch = 0.0, clip_frac = 0.0, pg_loss = 0.0, v_loss = 0.0;
    for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
      Rng shuffle_rng(seed_chain(update_seed, static_cast<std::uint64_t>(epoch), 0x5u));
      const std::vector<int> perm = shuffle_rng.permutation(n);

      double kl_accum = 0.0, pg_accum = 0.0, v_accum = 0.0;
      long clip_accum = 0;
      for (int start = 0; start < n; start += cfg_.minibatch) {
        const int mb = std::min(cfg_.minibatch, n - start);
        for (auto& g : pgrad_chunks) std::fill(g.begin(), g.end(), 0.0);
        for (auto& g : vgrad_chunks) std::fill(g.begin(), g.end(), 0.0);
        for (auto& s : stats_chunks) s = ChunkStats{};

        parallel_tasks(kGradChunks, cfg_.workers, [&](int chunk) {
          const ChunkRange r = chunk_range(mb, chunk);
          auto& pg = pgrad_chunks[static_cast<std::size_t>(chunk)];
          auto& vg = vgrad_chunks[static_cast<std::size_t>(chunk)];
          auto& cs = stats_chunks[static_cast<std::size_t>(chunk)];
          MlpTrace trace, vtrace;
          std::vector<double> d_mean(static_cast<std::size_t>(act_dim));
          const auto ls = policy_.log_std();
          for (int k = r.begin; k < r.end; ++k) {
            const int idx = perm[static_cast<std::size_t>(start + k)];
            const auto& obs = *arr.obs[static_cast<std::size_t>(idx)];
            const auto& v = *arr.presquash[static_cast<std::size_t>(idx)];
            const double adv = arr.advantages[static_cast<std::size_t>(idx)];
            const double ret = arr.returns[static_cast<std::size_t>(idx)];

            const std::vector<double> mean = policy_.mean_net().forward(obs, trace);
            const double lp_new = policy_.log_prob_presquash_given_mean(mean, v);
            const double log_ratio = lp_new - arr.old_log_probs[static_cast<std::size_t>(idx)];
            const double ratio = std::exp(log_ratio);
            const double clipped = clamp(ratio, 1.0 - cfg_.clip_ratio, 1.0 + cfg_.clip_ratio);
            const double pg1 = -adv * ratio;
            const double pg2 = -adv * clipped;
            const double sample_loss = std::max(pg1, pg2);
            cs.pg_sum += sample_loss;
            cs.kl_sum += (ratio - 1.0) - log_ratio;
            if (std::abs(ratio - 1.0) > cfg_.clip_ratio) ++cs.clipped;

            // gradient flows only through the unclipped branch
            if (pg1 >= pg2) {
              const double coef = -adv * ratio / static_cast<double>(mb);
              for (int i = 0; i < act_dim; ++i) {
                const double inv_var = std::exp(-2.0 * ls[static_cast<std::size_t>(i)]);
                const double diff = v[static_cast<std::size_t>(i)] - mean[static_cast<std::size_t>(i)];
                d_mean[static_cast<std::size_t>(i)] = coef * diff * inv_var;
                const double z2 = diff * diff * inv_var;
                pg[ls_off + static_cast<std::size_t>(i)] += coef * (z2 - 1.0);
              }
              policy_.mean_net().backward(trace, d_mean, pg);
            }

            const double val = value_net_.forward(obs, vtrace)[0];
            const double vdiff = val - ret;
            cs.v_sum += 0.5 * vdiff * vdiff;
            value_net_.backward(vtrace, std::vector<double>{vdiff / static_cast<double>(mb)}, vg);
          }
        });

        policy_.block().zero_grads();
        value_block_.zero_grads();
        auto pdst = policy_.block().grads();
        auto vdst = value_block_.grads();
        for (int c = 0; c < kGradChunks; ++c) {
          for (std::size_t i = 0; i < pdst.size(); ++i) pdst[i] += pgrad_chunks[static_cast<std::size_t>(c)][i];
          for (std::size_t i = 0; i < vdst.size(); ++i) vdst[i] += vgrad_chunks[static_cast<std::size_t>(c)][i];
          kl_accum += stats_chunks[static_cast<std::size_t>(c)].kl_sum;
          pg_accum += stats_chunks[static_cast<std::size_t>(c)].pg_sum;
          v_accum += stats_chunks[static_cast<std::size_t>(c)].v_sum;
          clip_accum += stats_chunks[static_cast<std::size_t>(c)].clipped;
        }
        // entropy bonus: dH/dlog_std_i = 1
        for (int i = 0; i < act_dim; ++i) pdst[ls_off + static_cast<std::size_t>(i)] -= cfg_.ent_coef;

        policy_.block().clip_grad_norm(cfg_.grad_clip);
        value_block_.clip_grad_norm(cfg_.grad_clip);
        AdamConfig pcfg;
        pcfg.lr = cfg_.lr_policy;
        AdamConfig vcfg;
        vcfg.lr = cfg_.lr_value;
        adam_policy_.step(policy_.block(), pcfg);
        adam_value_.step(value_block_, vcfg);
        policy_.clamp_log_std();
      }

      kl_epoch = kl_accum / static_cast<double>(n);
      clip_frac = static_cast<double>(clip_accum) / static_cast<double>(n);
      pg_loss = pg_accum / static_cast<double>(n);
      v_loss = v_accum / static_cast<double>(n);
      stats.epochs_run = epoch + 1;
      if (kl_epoch > 4.0 * cfg_.target_kl) {
        stats.kl_abort = true;
        break;
      }
    }

    stats.kl = kl_epoch;
    stats.clip_fraction = clip_frac;
    stats.policy_loss = pg_loss;
    stats.value_loss = v_loss;
    stats.entropy = gaussian_entropy(policy_.log_std());
    return stats;
  }

  // --- checkpoint / rollback plumbing ----------------------------------

  void append_blocks(const std::string& prefix, std::vector<NamedBlock>& out) const {
    out.push_back(snapshot_param_block(prefix + ".policy", policy_.block()));
    out.push_back(pack_vector(prefix + ".policy.adam", adam_policy_.pack()));
    out.push_back(snapshot_param_block(prefix + ".value", value_block_));
    out.push_back(pack_vector(prefix + ".value.adam", adam_value_.pack()));
  }

  void restore_blocks(const Checkpoint& ckpt, const std::string& prefix) {
    restore_param_block(ckpt, prefix + ".policy", policy_.block());
    adam_policy_.unpack(ckpt.block(prefix + ".policy.adam").values);
    restore_param_block(ckpt, prefix + ".value", value_block_);
    adam_value_.unpack(ckpt.block(prefix + ".value.adam").values);
  }

  struct Snapshot {
    std::vector<double> policy_values, value_values, adam_policy, adam_value;
  };

  Snapshot snapshot() const {
    return {std::vector<double>(policy_.block().values().begin(), policy_.block().values().end()),
            std::vector<double>(value_block_.values().begin(), value_block_.values().end()),
            adam_policy_.pack(), adam_value_.pack()};
  }

  void restore(const Snapshot& s) {
    policy_.block().set_values(s.policy_values);
    value_block_.set_values(s.value_values);
    adam_policy_.unpack(s.adam_policy);
    adam_value_.unpack(s.adam_value);
  }

  static NamedBlock pack_vector(const std::string& name, std::vector<double> data) {
    NamedBlock b;
    b.name = name;
    b.shapes = {{data.size(), 1}};
    b.values = std::move(data);
    return b;
  }

 private:
  PpoConfig cfg_;
  GaussianPolicy policy_;
  ParamBlock value_block_;
  Mlp value_net_;
  AdamState adam_policy_;
  AdamState adam_value_;
};

/// Entropy-regularized return of one episode under an arbitrary reward:
/// sum_t [reward_fn(x_t, u_t) - log pi(u_t | x_t, z)].
template <class RewardFn>
inline double maxent_return(const EpisodeData& ep, RewardFn&& reward_fn) {
  double s = 0.0;
  for (std::size_t t = 0; t < ep.length(); ++t)
    s += reward_fn(ep.obs_raw[t], ep.actions[t]) - ep.log_probs[t];
  return s;
}

}  // namespace mmirl

#endif  // MMIRL_PPO_HPP_
