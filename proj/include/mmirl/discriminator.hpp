#ifndef MMIRL_DISCRIMINATOR_HPP_
#define MMIRL_DISCRIMINATOR_HPP_

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

/// D(x,u,z) = exp(r) / (exp(r) + pi(u|x,z)) evaluated in its numerically
/// stable logistic form sigmoid(r - log pi). The two agree wherever the
/// literal exponential ratio is representable.
inline double discriminator_prob(double reward, double policy_log_prob) {
  return sigmoid(reward - policy_log_prob);
}

/// log D - log(1-D) = r - log pi: the generator's reward signal.
inline double airl_reward(double reward, double policy_log_prob) {
  return reward - policy_log_prob;
}

/// One state-action sample for the classifier: network input row
/// (normalized obs ++ normalized action ++ one-hot z) plus the filled-in
/// log pi(u|x,z) value.
struct DiscSample {
  std::vector<double> input;
  double policy_log_prob = 0.0;
};

/// Binary classification loss with demonstrations labeled as expert:
/// -mean_demo[log D] - mean_gen[log(1-D)], computed from per-sample
/// h = r - log pi via the stable log-sigmoid forms.
inline double binary_class_loss(std::span<const double> h_demo, std::span<const double> h_gen) {
  if (h_demo.empty() || h_gen.empty())
    throw std::invalid_argument("binary_class_loss: empty batch");
  double loss = 0.0;
  for (double h : h_demo) loss -= log_sigmoid(h) / static_cast<double>(h_demo.size());
  for (double h : h_gen) loss -= log_sigmoid(-h) / static_cast<double>(h_gen.size());
  return loss;
}

/// The learned reward r_theta(x, u, z) and its adversarial training step.
class Discriminator {
 public:
  Discriminator(int input_dim, std::vector<int> hidden, std::uint64_t init_seed) {
    std::vector<int> widths = std::move(hidden);
    widths.push_back(1);
    net_ = Mlp(block_, input_dim, widths);
    Rng rng(seed_chain(init_seed, 0xD15C));
    net_.init_xavier(rng, 0.1);
  }

  // the Mlp points into block_; copying would alias the source's storage
  Discriminator(const Discriminator&) = delete;
  Discriminator& operator=(const Discriminator&) = delete;

  ParamBlock& block() { return block_; }
  const ParamBlock& block() const { return block_; }
  const Mlp& net() const { return net_; }
  int input_dim() const { return net_.input_dim(); }

  double reward(std::span<const double> input) const { return net_.forward(input)[0]; }

  struct EvalResult {
    double loss = 0.0;
    double accuracy = 0.0;
    std::vector<double> gen_rewards;  // r_theta per generated sample, reusable for policy rewards
  };

  /// Exact loss/accuracy over full sample sets (demos labeled 1).
  EvalResult evaluate(std::span<const DiscSample> demo, std::span<const DiscSample> gen,
                      int workers = 1) const {
    if (demo.empty() || gen.empty()) throw std::invalid_argument("Discriminator::evaluate: empty batch");
    std::vector<double> h_demo(demo.size()), h_gen(gen.size());
    EvalResult out;
    out.gen_rewards.resize(gen.size());
    parallel_tasks(kGradChunks, workers, [&](int chunk) {
      const ChunkRange rd = chunk_range(static_cast<int>(demo.size()), chunk);
      for (int i = rd.begin; i < rd.end; ++i) {
        const auto& s = demo[static_cast<std::size_t>(i)];
        h_demo[static_cast<std::size_t>(i)] = reward(s.input) - s.policy_log_prob;
      }
      const ChunkRange rg = chunk_range(static_cast<int>(gen.size()), chunk);
      for (int i = rg.begin; i < rg.end; ++i) {
        const auto& s = gen[static_cast<std::size_t>(i)];
        const double r = reward(s.input);
        out.gen_rewards[static_cast<std::size_t>(i)] = r;
        h_gen[static_cast<std::size_t>(i)] = r - s.policy_log_prob;
      }
    });
    out.loss = binary_class_loss(h_demo, h_gen);
    long correct = 0;
    for (double h : h_demo)
      if (h > 0.0) ++correct;
    for (double h : h_gen)
      if (h < 0.0) ++correct;
    out.accuracy = static_cast<double>(correct) / static_cast<double>(demo.size() + gen.size());
    return out;
  }

  /// One or more epochs of balanced minibatch descent on the
  /// classification loss. Each step draws half its samples from each side,
  /// so unequal set sizes do not skew the labels.
  void update(std::span<const DiscSample> demo, std::span<const DiscSample> gen, int epochs,
              int minibatch, double lr, double grad_clip, std::uint64_t seed, int workers = 1) {
    if (demo.empty() || gen.empty()) throw std::invalid_argument("Discriminator::update: empty batch");
    const int nd = static_cast<int>(demo.size());
    const int ng = static_cast<int>(gen.size());
    const int half = std::max(1, minibatch / 2);
    const int steps_per_epoch = (std::max(nd, ng) + half - 1) / half;

    std::vector<std::vector<double>> grad_chunks(kGradChunks, std::vector<double>(block_.size(), 0.0));

    for (int epoch = 0; epoch < epochs; ++epoch) {
      Rng rng(seed_chain(seed, static_cast<std::uint64_t>(epoch), 0xDD));
      std::vector<int> dperm = rng.permutation(nd);
      std::vector<int> gperm = rng.permutation(ng);
      int dpos = 0, gpos = 0;
      for (int step = 0; step < steps_per_epoch; ++step) {
        // assemble a balanced minibatch, reshuffling either side on wrap
        std::vector<const DiscSample*> mb;
        std::vector<int> labels;
        mb.reserve(static_cast<std::size_t>(2 * half));
        for (int i = 0; i < half; ++i) {
          if (dpos >= nd) {
            dperm = rng.permutation(nd);
            dpos = 0;
          }
          mb.push_back(&demo[static_cast<std::size_t>(dperm[static_cast<std::size_t>(dpos++)])]);
          labels.push_back(1);
        }
        for (int i = 0; i < half; ++i) {
          if (gpos >= ng) {
            gperm = rng.permutation(ng);
            gpos = 0;
          }
          mb.push_back(&gen[static_cast<std::size_t>(gperm[static_cast<std::size_t>(gpos++)])]);
          labels.push_back(0);
        }

        for (auto& g : grad_chunks) std::fill(g.begin(), g.end(), 0.0);
        const int mb_n = static_cast<int>(mb.size());
        parallel_tasks(kGradChunks, workers, [&](int chunk) {
          const ChunkRange r = chunk_range(mb_n, chunk);
          MlpTrace trace;
          auto& gbuf = grad_chunks[static_cast<std::size_t>(chunk)];
          for (int k = r.begin; k < r.end; ++k) {
            const DiscSample& s = *mb[static_cast<std::size_t>(k)];
            const double rwd = net_.forward(s.input, trace)[0];
            const double h = rwd - s.policy_log_prob;
            const double d = sigmoid(h);
            // demo: -log D, d/dh = D - 1; gen: -log(1-D), d/dh = D
            const double dh = (labels[static_cast<std::size_t>(k)] == 1 ? d - 1.0 : d) /
                              static_cast<double>(mb_n);
            net_.backward(trace, std::vector<double>{dh}, gbuf);
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
  }

  AdamState& adam() { return adam_; }

 private:
  ParamBlock block_;
  Mlp net_;
  AdamState adam_;
};

}  // namespace mmirl

#endif  // MMIRL_DISCRIMINATOR_HPP_
