#ifndef MMIRL_INFERENCE_NET_HPP_
#define MMIRL_INFERENCE_NET_HPP_

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "mmirl/adam.hpp"
#include "mmirl/mlp.hpp"
#include "mmirl/numeric.hpp"
#include "mmirl/parallel.hpp"
#include "mmirl/param_block.hpp"
#include "mmirl/rng.hpp"

namespace mmirl {

inline std::vector<double> softmax(std::span<const double> logits) {
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

inline double categorical_entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

/// Trajectory-level posterior q(z | tau): a per-step encoder over (x, u)
/// pairs, permutation-invariant mean pooling across steps, and a linear
/// head to M-way softmax probabilities. Approximates the mode posterior
/// the adversarial game cannot access directly.
class InferenceNet {
 public:
  /// A trajectory as the net sees it: one row per step, each row
  /// (normalized obs ++ normalized action).
  using Rows = std::vector<std::vector<double>>;

  InferenceNet(int input_dim, std::vector<int> encoder_widths, int mode_count, std::uint64_t init_seed)
      : mode_count_(mode_count) {
    if (mode_count < 1) throw std::invalid_argument("InferenceNet: mode_count must be >= 1");
    encoder_ = Mlp(block_, input_dim, std::move(encoder_widths));
    head_ = Mlp(block_, encoder_.output_dim(), {mode_count});
    Rng rng(seed_chain(init_seed, 0x1F3A));
    encoder_.init_xavier(rng, 1.0);
    head_.init_xavier(rng, 0.01);
  }

  InferenceNet(const InferenceNet&) = delete;
  InferenceNet& operator=(const InferenceNet&) = delete;

  int mode_count() const { return mode_count_; }
  int input_dim() const { return encoder_.input_dim(); }
  ParamBlock& block() { return block_; }
  const ParamBlock& block() const { return block_; }
  Mlp& head() { return head_; }

  /// q(z | tau): strictly positive, sums to one.
  std::vector<double> probs(const Rows& rows) const {
    if (rows.empty()) throw std::invalid_argument("InferenceNet::probs: empty trajectory");
    return softmax(head_.forward(pooled_feature(rows)));
  }

  double log_prob(const Rows& rows, int z) const {
    const std::vector<double> logits = head_.forward(pooled_feature(rows));
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double lse = 0.0;
    for (double v : logits) lse += std::exp(v - mx);
    return logits[static_cast<std::size_t>(z)] - mx - std::log(lse);
  }

  struct LabeledTraj {
    const Rows* rows;
    int z;
  };

  /// Maximizes mean log q(z | tau) over trajectories whose conditioning z
  /// is known (generated rollouts). Returns the pre-update mean negative
  /// log-likelihood.
  double update(std::span<const LabeledTraj> trajs, int epochs, int minibatch, double lr,
                double grad_clip, std::uint64_t seed, int workers = 1) {
    if (trajs.empty()) throw std::invalid_argument("InferenceNet::update: no trajectories");
    const int n = static_cast<int>(trajs.size());
    double first_nll = 0.0;
    for (const auto& t : trajs) first_nll -= log_prob(*t.rows, t.z);
    first_nll /= static_cast<double>(n);

    std::vector<std::vector<double>> grad_chunks(kGradChunks, std::vector<double>(block_.size(), 0.0));
    for (int epoch = 0; epoch < epochs; ++epoch) {
      Rng rng(seed_chain(seed, static_cast<std::uint64_t>(epoch), 0x1F));
      const std::vector<int> perm = rng.permutation(n);
      for (int start = 0; start < n; start += minibatch) {
        const int mb = std::min(minibatch, n - start);
        for (auto& g : grad_chunks) std::fill(g.begin(), g.end(), 0.0);
        parallel_tasks(kGradChunks, workers, [&](int chunk) {
          const ChunkRange r = chunk_range(mb, chunk);
          auto& gbuf = grad_chunks[static_cast<std::size_t>(chunk)];
          MlpTrace htrace, etrace;
          for (int k = r.begin; k < r.end; ++k) {
            const LabeledTraj& lt = trajs[static_cast<std::size_t>(perm[static_cast<std::size_t>(start + k)])];
            const Rows& rows = *lt.rows;
            const double inv_t = 1.0 / static_cast<double>(rows.size());

            std::vector<double> pooled(static_cast<std::size_t>(encoder_.output_dim()), 0.0);
            for (const auto& row : rows) {
              const std::vector<double> f = encoder_.forward(row);
              for (std::size_t i = 0; i < pooled.size(); ++i) pooled[i] += f[i] * inv_t;
            }
            const std::vector<double> logits = head_.forward(pooled, htrace);
            const std::vector<double> p = softmax(logits);

            // d(-log q(z))/d logits = softmax - onehot(z)
            std::vector<double> dlogits(p);
            dlogits[static_cast<std::size_t>(lt.z)] -= 1.0;
            for (double& v : dlogits) v /= static_cast<double>(mb);

            std::vector<double> dpooled(pooled.size(), 0.0);
            head_.backward(htrace, dlogits, gbuf, dpooled);
            for (double& v : dpooled) v *= inv_t;  // mean pooling
            for (const auto& row : rows) {
              (void)encoder_.forward(row, etrace);
              encoder_.backward(etrace, dpooled, gbuf);
            }
          }
        });

        block_.zero_grads();
        auto dst = block_.grads();
        for (int c = 0; c < kGradChunks; ++c)
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += grad_chunks[static_cast<std::size_t>(c)][i];
        block_.clip_grad_norm(grad_clip);
        AdamConfig cfg;
        cfg.lr = lr;
        adam_.step(block_, cfg);
      }
    }
    return first_nll;
  }

  AdamState& adam() { return adam_; }

 private:
  std::vector<double> pooled_feature(const Rows& rows) const {
    std::vector<double> pooled(static_cast<std::size_t>(encoder_.output_dim()), 0.0);
    const double inv_t = 1.0 / static_cast<double>(rows.size());
    for (const auto& row : rows) {
      const std::vector<double> f = encoder_.forward(row);
      for (std::size_t i = 0; i < pooled.size(); ++i) pooled[i] += f[i] * inv_t;
    }
    return pooled;
  }

  int mode_count_;
  ParamBlock block_;
  Mlp encoder_;
  Mlp head_;
  AdamState adam_;
};

/// Sample estimate of the variational mutual-information lower bound
/// L_I = E[log q(z|tau) - log p(z)] over generated trajectories.
struct InfoBound {
  double value = 0.0;
  double std_error = 0.0;
};

inline InfoBound info_lower_bound(std::span<const double> log_q_of_z,
                                  std::span<const double> log_prior_of_z) {
  if (log_q_of_z.size() != log_prior_of_z.size() || log_q_of_z.empty())
    throw std::invalid_argument("info_lower_bound: bad inputs");
  std::vector<double> terms(log_q_of_z.size());
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = log_q_of_z[i] - log_prior_of_z[i];
  InfoBound out;
  out.value = mean_of(terms);
  out.std_error = terms.size() > 1 ? stddev_of(terms) / std::sqrt(static_cast<double>(terms.size())) : 0.0;
  return out;
}

/// Prior over the latent context; uniform unless configured otherwise.
struct ContextPrior {
  std::vector<double> probs;

  static ContextPrior uniform(int m) {
    ContextPrior p;
    p.probs.assign(static_cast<std::size_t>(m), 1.0 / static_cast<double>(m));
    return p;
  }

  double log_prob(int z) const { return std::log(probs[static_cast<std::size_t>(z)]); }
};

}  // namespace mmirl

#endif  // MMIRL_INFERENCE_NET_HPP_
