#ifndef MMIRL_AIRL_HPP_
#define MMIRL_AIRL_HPP_

#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmirl/checkpoint.hpp"
#include "mmirl/config.hpp"
#include "mmirl/discriminator.hpp"
#include "mmirl/env.hpp"
#include "mmirl/inference_net.hpp"
#include "mmirl/metrics.hpp"
#include "mmirl/policy.hpp"
#include "mmirl/ppo.hpp"
#include "mmirl/rollout.hpp"
#include "mmirl/trajectory.hpp"

namespace mmirl {

struct AirlStats {
  int iteration = 0;
  double disc_loss = 0.0;
  double disc_accuracy = 0.0;
  double info_lb = 0.0;
  double info_lb_se = 0.0;
  double gen_return_est = 0.0;
  double true_return_mean = 0.0;
  double inference_entropy = 0.0;
  double policy_kl = 0.0;
  double policy_clip_fraction = 0.0;
  double policy_entropy = 0.0;
  int dropped_episodes = 0;
  bool rolled_back = false;
  double wall_time_s = 0.0;
};

/// A demonstration trajectory preprocessed into the tensors the three
/// networks consume. Built once; none of it carries a mode label.
struct PreparedDemo {
  InferenceNet::Rows xu_rows;                 // (obs_norm ++ act_norm) per step
  std::vector<std::vector<double>> obs_norm;  // per step
  std::vector<std::vector<double>> presquash; // unsquashed actions
};

inline std::vector<double> normalize_action(std::span<const double> u, const EnvSpec& spec) {
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    out[i] = 2.0 * (u[i] - spec.action_low[i]) / (spec.action_high[i] - spec.action_low[i]) - 1.0;
  return out;
}

inline PreparedDemo prepare_demo(const Trajectory& traj, const EnvSpec& spec) {
  if (traj.states.empty() || traj.states.size() != traj.actions.size())
    throw std::invalid_argument("prepare_demo: malformed trajectory");
  PreparedDemo out;
  const std::size_t n = traj.states.size();
  out.xu_rows.reserve(n);
  out.obs_norm.reserve(n);
  out.presquash.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    const auto& raw = traj.states[t];
    const auto& u = traj.actions[t];
    if (raw.size() != static_cast<std::size_t>(spec.state_dim) ||
        u.size() != static_cast<std::size_t>(spec.action_dim))
      throw std::invalid_argument("prepare_demo: trajectory dims do not match environment");
    std::vector<double> obs(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) obs[i] = (raw[i] - spec.norm_center[i]) / spec.norm_scale[i];
    std::vector<double> act = normalize_action(u, spec);
    std::vector<double> v(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
      v[i] = unsquash_from_bounds(u[i], spec.action_low[i], spec.action_high[i]);
    std::vector<double> row(obs);
    row.insert(row.end(), act.begin(), act.end());
    out.xu_rows.push_back(std::move(row));
    out.obs_norm.push_back(std::move(obs));
    out.presquash.push_back(std::move(v));
  }
  return out;
}

/// Asserts that the one-hot context block is constant within each episode.
inline void verify_z_constancy(const RolloutBatch& batch, int state_dim) {
  for (const auto& ep : batch.episodes) {
    for (const auto& obs : ep.obs_aug) {
      for (int m = 0; m < batch.mode_count; ++m) {
        const double want = (m == ep.z) ? 1.0 : 0.0;
        if (obs[static_cast<std::size_t>(state_dim + m)] != want)
          throw std::logic_error("rollout batch violates z-constancy within an episode");
      }
    }
  }
}

/// Context-conditional adversarial IRL: jointly trains the reward
/// discriminator r(x,u,z), the context-conditional policy pi(u|x,z), and
/// the trajectory-level inference net q(z|tau) from unlabeled multi-mode
/// demonstrations.
///
/// One outer iteration:
///   1. sample two demonstration batches
///   2. infer z ~ q(z|tau) for the first batch; these form the context pool
///   3. roll out pi(.|., z) with z fixed per episode (env mode drawn by
///      nature, independent of z)
///   4. ascend the variational MI bound in psi on the generated rollouts
///   5. feed the MI bound back through theta's pathway as an episode-end
///      reward bonus
///   6. descend the binary classification loss in theta (demos labeled
///      expert, z for demos drawn fresh from q)
///   7. forward-RL update of omega on the r - log pi reward
class MtAirlTrainer {
 public:
  /// env_override lets callers train against environments outside the
  /// config factory (synthetic test rigs); production callers omit it.
  MtAirlTrainer(RunConfig cfg, std::vector<Trajectory> demos, const Env* env_override = nullptr)
      : cfg_(std::move(cfg)), env_(env_override ? env_override->clone() : make_env(cfg_)) {
    const EnvSpec& spec = env_->spec();
    mode_count_ = spec.mode_count;
    prior_ = ContextPrior::uniform(mode_count_);
    if (demos.empty()) throw std::invalid_argument("MtAirlTrainer: no demonstrations");

    demos_ = std::move(demos);
    prepared_.reserve(demos_.size());
    for (const auto& d : demos_) prepared_.push_back(prepare_demo(d, spec));

    std::vector<int> hidden(static_cast<std::size_t>(cfg_.training.hidden_layers),
                            cfg_.training.hidden_width);
    PolicyLayout layout;
    layout.obs_dim = spec.state_dim + mode_count_;
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

    const std::uint64_t seed = cfg_.training.seed;
    agent_ = std::make_unique<PolicyAgent>(layout, ppo, seed_chain(seed, 0xAE17));
    disc_ = std::make_unique<Discriminator>(spec.state_dim + spec.action_dim + mode_count_, hidden,
                                            seed_chain(seed, 0xD15C));
    inference_ = std::make_unique<InferenceNet>(spec.state_dim + spec.action_dim, hidden, mode_count_,
                                                seed_chain(seed, 0x1F));
    last_good_ = snapshot();
  }

  int iteration() const { return iteration_; }
  PolicyAgent& agent() { return *agent_; }
  const PolicyAgent& agent() const { return *agent_; }
  Discriminator& discriminator() { return *disc_; }
  InferenceNet& inference() { return *inference_; }
  const ContextPrior& prior() const { return prior_; }
  const Env& env() const { return *env_; }
  int mode_count() const { return mode_count_; }

  InferenceNet::Rows rows_for(const Trajectory& traj) const {
    return prepare_demo(traj, env_->spec()).xu_rows;
  }

  AirlStats train_iteration() {
    const auto t0 = std::chrono::steady_clock::now();
    AirlStats stats = iterate_once();
    stats.iteration = iteration_;

    const bool finite = std::isfinite(stats.disc_loss) && std::isfinite(stats.info_lb) &&
                        std::isfinite(stats.gen_return_est) && std::isfinite(stats.policy_kl) &&
                        all_finite(agent_->policy().block().values()) &&
                        all_finite(agent_->value_block().values()) &&
                        all_finite(disc_->block().values()) && all_finite(inference_->block().values());
    if (finite) {
      last_good_ = snapshot();
    } else {
      restore_snapshot(last_good_);
      ++nonfinite_events_;
      if (nonfinite_events_ > 1)
        throw std::runtime_error("mt-airl: non-finite training state recurred after halving learning rates");
      lr_scale_ *= 0.5;
      stats.rolled_back = true;
    }
    ++iteration_;
    stats.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return stats;
  }

  // --- checkpointing ----------------------------------------------------

  Checkpoint make_checkpoint() const {
    Checkpoint ckpt;
    ckpt.meta["kind"] = "irl";
    ckpt.meta["env_id"] = env_->spec().id;
    ckpt.meta["iteration"] = std::to_string(iteration_);
    ckpt.meta["seed"] = std::to_string(cfg_.training.seed);
    ckpt.meta["config_hash"] = config_hash(cfg_);
    ckpt.meta["mode_count"] = std::to_string(mode_count_);
    ckpt.meta["lr_scale"] = detail::fmt_real(lr_scale_);
    ckpt.meta["nonfinite_events"] = std::to_string(nonfinite_events_);
    agent_->append_blocks("agent", ckpt.blocks);
    ckpt.blocks.push_back(snapshot_param_block("disc", disc_->block()));
    ckpt.blocks.push_back(PolicyAgent::pack_vector("disc.adam", disc_->adam().pack()));
    ckpt.blocks.push_back(snapshot_param_block("inference", inference_->block()));
    ckpt.blocks.push_back(PolicyAgent::pack_vector("inference.adam", inference_->adam().pack()));
    return ckpt;
  }

  void restore(const Checkpoint& ckpt) {
    agent_->restore_blocks(ckpt, "agent");
    restore_param_block(ckpt, "disc", disc_->block());
    disc_->adam().unpack(ckpt.block("disc.adam").values);
    restore_param_block(ckpt, "inference", inference_->block());
    inference_->adam().unpack(ckpt.block("inference.adam").values);
    iteration_ = std::stoi(ckpt.meta_or("iteration", "0"));
    lr_scale_ = std::stod(ckpt.meta_or("lr_scale", "1"));
    nonfinite_events_ = std::stoi(ckpt.meta_or("nonfinite_events", "0"));
    last_good_ = snapshot();
  }

  MetricRecord metrics_record(const AirlStats& s) const {
    return {
        {"iteration", static_cast<long long>(s.iteration)},
        {"disc_loss", s.disc_loss},
        {"disc_accuracy", s.disc_accuracy},
        {"info_lb", s.info_lb},
        {"info_lb_se", s.info_lb_se},
        {"gen_return_est", s.gen_return_est},
        {"true_return_mean", s.true_return_mean},
        {"inference_entropy", s.inference_entropy},
        {"policy_kl", s.policy_kl},
        {"policy_clip_fraction", s.policy_clip_fraction},
        {"policy_entropy", s.policy_entropy},
        {"dropped_episodes", static_cast<long long>(s.dropped_episodes)},
        {"rolled_back", static_cast<long long>(s.rolled_back ? 1 : 0)},
        {"wall_time_s", s.wall_time_s},
    };
  }

 private:
  struct Snapshot {
    PolicyAgent::Snapshot agent;
    std::vector<double> disc_values, disc_adam, inf_values, inf_adam;
  };

  Snapshot snapshot() const {
    return {agent_->snapshot(),
            std::vector<double>(disc_->block().values().begin(), disc_->block().values().end()),
            disc_->adam().pack(),
            std::vector<double>(inference_->block().values().begin(), inference_->block().values().end()),
            inference_->adam().pack()};
  }

  void restore_snapshot(const Snapshot& s) {
    agent_->restore(s.agent);
    disc_->block().set_values(s.disc_values);
    disc_->adam().unpack(s.disc_adam);
    inference_->block().set_values(s.inf_values);
    inference_->adam().unpack(s.inf_adam);
  }

  AirlStats iterate_once() {
    AirlStats stats;
    const EnvSpec& spec = env_->spec();
    const int state_dim = spec.state_dim;
    const std::uint64_t it_seed = seed_chain(cfg_.training.seed, static_cast<std::uint64_t>(iteration_), 0xA11);
    const int n_demos = static_cast<int>(prepared_.size());
    const int batch_size = std::min(cfg_.training.demo_batch, n_demos);

    // (1) two independent demonstration batches
    Rng batch_rng(seed_chain(it_seed, 1));
    const std::vector<int> perm1 = batch_rng.permutation(n_demos);
    const std::vector<int> perm2 = batch_rng.permutation(n_demos);
    const std::span<const int> batch1(perm1.data(), static_cast<std::size_t>(batch_size));
    const std::span<const int> batch2(perm2.data(), static_cast<std::size_t>(batch_size));

    // (2) infer the context pool from the first batch
    Rng z_rng(seed_chain(it_seed, 2));
    std::vector<int> z_pool(static_cast<std::size_t>(batch_size));
    for (int j = 0; j < batch_size; ++j) {
      const auto probs = inference_->probs(prepared_[static_cast<std::size_t>(batch1[static_cast<std::size_t>(j)])].xu_rows);
      z_pool[static_cast<std::size_t>(j)] = sample_categorical(probs, z_rng.uniform());
    }

    // (3) context-conditioned rollouts; nature draws the physical mode
    RolloutOptions opt;
    opt.n_steps = cfg_.training.rollout_steps;
    opt.seed = seed_chain(it_seed, 3);
    opt.workers = cfg_.training.workers;
    opt.env_mode_fn = [this](int, Rng& rng) { return rng.uniform_int(mode_count_); };
    opt.z_fn = [&z_pool](int e, Rng&) { return z_pool[static_cast<std::size_t>(e) % z_pool.size()]; };
    RolloutBatch batch = collect_rollouts(agent_->policy(), *env_, opt);
    stats.dropped_episodes = batch.dropped_episodes;
    verify_z_constancy(batch, state_dim);

    // generated trajectories as the inference net sees them
    std::vector<InferenceNet::Rows> gen_rows(batch.episodes.size());
    for (std::size_t e = 0; e < batch.episodes.size(); ++e) {
      const EpisodeData& ep = batch.episodes[e];
      gen_rows[e].reserve(ep.length());
      for (std::size_t t = 0; t < ep.length(); ++t) {
        std::vector<double> row(ep.obs_aug[t].begin(), ep.obs_aug[t].begin() + state_dim);
        const std::vector<double> act = normalize_action(ep.actions[t], spec);
        row.insert(row.end(), act.begin(), act.end());
        gen_rows[e].push_back(std::move(row));
      }
    }

    // (4) ascend L_info in psi
    std::vector<InferenceNet::LabeledTraj> labeled(batch.episodes.size());
    for (std::size_t e = 0; e < batch.episodes.size(); ++e)
      labeled[e] = {&gen_rows[e], batch.episodes[e].z};
    inference_->update(labeled, cfg_.training.inference_epochs, 16,
                       cfg_.training.lr_inference * lr_scale_, cfg_.training.grad_clip,
                       seed_chain(it_seed, 4), cfg_.training.workers);

    // (5) MI lower bound per generated trajectory (theta's pathway is the
    // episode-end reward bonus applied below)
    std::vector<double> log_q(batch.episodes.size()), log_p(batch.episodes.size());
    for (std::size_t e = 0; e < batch.episodes.size(); ++e) {
      log_q[e] = inference_->log_prob(gen_rows[e], batch.episodes[e].z);
      log_p[e] = prior_.log_prob(batch.episodes[e].z);
    }
    const InfoBound info = info_lower_bound(log_q, log_p);
    stats.info_lb = info.value;
    stats.info_lb_se = info.std_error;

    // (6) classification update of theta; expert z drawn fresh from q
    Rng z2_rng(seed_chain(it_seed, 6));
    std::vector<DiscSample> demo_samples;
    double inf_entropy = 0.0;
    for (int j = 0; j < batch_size; ++j) {
      const PreparedDemo& d = prepared_[static_cast<std::size_t>(batch2[static_cast<std::size_t>(j)])];
      const auto probs = inference_->probs(d.xu_rows);
      inf_entropy += categorical_entropy(probs);
      const int z = sample_categorical(probs, z2_rng.uniform());
      for (std::size_t t = 0; t < d.xu_rows.size(); ++t) {
        DiscSample s;
        s.input = d.xu_rows[t];
        s.input.resize(s.input.size() + static_cast<std::size_t>(mode_count_), 0.0);
        s.input[d.xu_rows[t].size() + static_cast<std::size_t>(z)] = 1.0;
        const std::vector<double> obs_aug = augment_observation(d.obs_norm[t], z, mode_count_);
        s.policy_log_prob = agent_->policy().log_prob_presquash(obs_aug, d.presquash[t]);
        demo_samples.push_back(std::move(s));
      }
    }
    stats.inference_entropy = inf_entropy / static_cast<double>(batch_size);

    std::vector<DiscSample> gen_samples;
    gen_samples.reserve(batch.total_steps());
    for (std::size_t e = 0; e < batch.episodes.size(); ++e) {
      const EpisodeData& ep = batch.episodes[e];
      for (std::size_t t = 0; t < ep.length(); ++t) {
        DiscSample s;
        s.input = gen_rows[e][t];
        s.input.resize(s.input.size() + static_cast<std::size_t>(mode_count_), 0.0);
        s.input[gen_rows[e][t].size() + static_cast<std::size_t>(ep.z)] = 1.0;
        s.policy_log_prob = ep.log_probs[t];
        gen_samples.push_back(std::move(s));
      }
    }

    disc_->update(demo_samples, gen_samples, cfg_.training.disc_epochs, cfg_.training.disc_minibatch,
                  cfg_.training.lr_disc * lr_scale_, cfg_.training.grad_clip, seed_chain(it_seed, 5),
                  cfg_.training.workers);
    const Discriminator::EvalResult eval = disc_->evaluate(demo_samples, gen_samples, cfg_.training.workers);
    stats.disc_loss = eval.loss;
    stats.disc_accuracy = eval.accuracy;

    // (7) assemble the generator reward r - log pi (+ info bonus) and
    // run the forward solver
    std::size_t flat = 0;
    double gen_return = 0.0, true_return = 0.0;
    for (std::size_t e = 0; e < batch.episodes.size(); ++e) {
      EpisodeData& ep = batch.episodes[e];
      double ep_ret = 0.0;
      for (std::size_t t = 0; t < ep.length(); ++t, ++flat) {
        ep.train_rewards[t] = airl_reward(eval.gen_rewards[flat], ep.log_probs[t]);
        if (t + 1 == ep.length())
          ep.train_rewards[t] += cfg_.training.info_coef * (log_q[e] - log_p[e]);
        ep_ret += ep.train_rewards[t];
        true_return += ep.env_rewards[t];
      }
      gen_return += ep_ret;
    }
    stats.gen_return_est = gen_return / static_cast<double>(batch.episodes.size());
    stats.true_return_mean = true_return / static_cast<double>(batch.episodes.size());

    PpoConfig& ppo = agent_->config();
    ppo.lr_policy = cfg_.training.lr_policy * lr_scale_;
    ppo.lr_value = cfg_.training.lr_value * lr_scale_;
    const UpdateStats pstats = agent_->update(batch, seed_chain(it_seed, 7));
    stats.policy_kl = pstats.kl;
    stats.policy_clip_fraction = pstats.clip_fraction;
    stats.policy_entropy = pstats.entropy;
    return stats;
  }

  RunConfig cfg_;
  std::unique_ptr<Env> env_;
  int mode_count_ = 0;
  ContextPrior prior_;
  std::vector<Trajectory> demos_;
  std::vector<PreparedDemo> prepared_;
  std::unique_ptr<PolicyAgent> agent_;
  std::unique_ptr<Discriminator> disc_;
  std::unique_ptr<InferenceNet> inference_;
  int iteration_ = 0;
  double lr_scale_ = 1.0;
  int nonfinite_events_ = 0;
  Snapshot last_good_;
};

/// Networks reconstructed from an IRL checkpoint, shaped for `cfg`.
struct IrlBundle {
  std::unique_ptr<PolicyAgent> agent;
  std::unique_ptr<Discriminator> disc;
  std::unique_ptr<InferenceNet> inference;
};

inline IrlBundle load_irl_bundle(const RunConfig& cfg, const Checkpoint& ckpt) {
  std::unique_ptr<Env> env = make_env(cfg);
  const EnvSpec& spec = env->spec();
  const std::string ckpt_env = ckpt.meta_or("env_id", spec.id);
  if (ckpt_env != spec.id)
    throw CheckpointError("checkpoint: trained on env '" + ckpt_env + "', config selects '" + spec.id + "'");
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

  IrlBundle out;
  PpoConfig ppo;
  ppo.workers = cfg.training.workers;
  out.agent = std::make_unique<PolicyAgent>(layout, ppo, 0);
  out.agent->restore_blocks(ckpt, "agent");
  if (ckpt.has_block("disc")) {
    out.disc = std::make_unique<Discriminator>(spec.state_dim + spec.action_dim + spec.mode_count,
                                               hidden, 0);
    restore_param_block(ckpt, "disc", out.disc->block());
  }
  if (ckpt.has_block("inference")) {
    out.inference = std::make_unique<InferenceNet>(spec.state_dim + spec.action_dim, hidden,
                                                   spec.mode_count, 0);
    restore_param_block(ckpt, "inference", out.inference->block());
  }
  return out;
}

}  // namespace mmirl

#endif  // MMIRL_AIRL_HPP_
