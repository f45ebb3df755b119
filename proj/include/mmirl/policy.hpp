#ifndef MMIRL_POLICY_HPP_
#define MMIRL_POLICY_HPP_

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "mmirl/gaussian.hpp"
#include "mmirl/mlp.hpp"
#include "mmirl/numeric.hpp"
#include "mmirl/param_block.hpp"
#include "mmirl/rng.hpp"

namespace mmirl {

struct PolicyLayout {
  int obs_dim = 0;  // augmented observation width (state_dim + mode count)
  int act_dim = 0;
  std::vector<int> hidden = {64, 64};
  double log_std_init = -0.5;
  double log_std_min = -5.0;
  double log_std_max = 2.0;
  std::vector<double> act_low;
  std::vector<double> act_high;
};

/// Stochastic control policy: an MLP maps the augmented observation to a
/// pre-squash Gaussian mean; a state-independent learned log-std completes
/// the head. Samples are tanh-squashed to the action bounds with the
/// matching log-density correction.
class GaussianPolicy {
 public:
  explicit GaussianPolicy(PolicyLayout layout) : layout_(std::move(layout)) {
    std::vector<int> widths = layout_.hidden;
    widths.push_back(layout_.act_dim);
    net_ = Mlp(block_, layout_.obs_dim, widths);
    log_std_offset_ = block_.allocate(static_cast<std::size_t>(layout_.act_dim), 1);
    for (auto& v : block_.values(log_std_offset_, static_cast<std::size_t>(layout_.act_dim)))
      v = layout_.log_std_init;
  }

  // the Mlp points into block_; copying would alias the source's storage
  GaussianPolicy(const GaussianPolicy&) = delete;
  GaussianPolicy& operator=(const GaussianPolicy&) = delete;

  void init(Rng& rng, double output_scale = 0.01) {
    net_.init_xavier(rng, output_scale);
    for (auto& v : block_.values(log_std_offset_, static_cast<std::size_t>(layout_.act_dim)))
      v = layout_.log_std_init;
  }

  const PolicyLayout& layout() const { return layout_; }
  ParamBlock& block() { return block_; }
  const ParamBlock& block() const { return block_; }
  const Mlp& mean_net() const { return net_; }
  std::size_t log_std_offset() const { return log_std_offset_; }

  std::span<const double> log_std() const {
    return block_.values(log_std_offset_, static_cast<std::size_t>(layout_.act_dim));
  }
  std::span<double> log_std_mutable() {
    return block_.values(log_std_offset_, static_cast<std::size_t>(layout_.act_dim));
  }

  void clamp_log_std() {
    for (auto& v : log_std_mutable()) v = clamp(v, layout_.log_std_min, layout_.log_std_max);
  }

  GaussianHead head(std::span<const double> obs_aug) const {
    GaussianHead h;
    h.mean = net_.forward(obs_aug);
    h.log_std.assign(log_std().begin(), log_std().end());
    return h;
  }

  struct Sample {
    std::vector<double> action;     // bounded action u
    std::vector<double> presquash;  // v with u = squash(v)
    double log_prob = 0.0;
  };

  Sample sample(std::span<const double> obs_aug, Rng& rng) const {
    const std::vector<double> mean = net_.forward(obs_aug);
    const auto ls = log_std();
    Sample s;
    s.presquash.resize(mean.size());
    s.action.resize(mean.size());
    for (std::size_t i = 0; i < mean.size(); ++i) {
      s.presquash[i] = mean[i] + std::exp(ls[i]) * rng.normal();
      s.action[i] = squash_to_bounds(s.presquash[i], layout_.act_low[i], layout_.act_high[i]);
    }
    s.log_prob = log_prob_presquash_given_mean(mean, s.presquash);
    return s;
  }

  // deterministic action: squashed mean
  std::vector<double> mean_action(std::span<const double> obs_aug) const {
    std::vector<double> mean = net_.forward(obs_aug);
    for (std::size_t i = 0; i < mean.size(); ++i)
      mean[i] = squash_to_bounds(mean[i], layout_.act_low[i], layout_.act_high[i]);
    return mean;
  }

  /// log pi(u | obs) evaluated through the stored pre-squash variable.
  double log_prob_presquash(std::span<const double> obs_aug, std::span<const double> v) const {
    return log_prob_presquash_given_mean(net_.forward(obs_aug), v);
  }

  /// log pi(u | obs) for an arbitrary bounded action (expert data); inverts
  /// the squash with a clamped atanh.
  double log_prob_action(std::span<const double> obs_aug, std::span<const double> u) const {
    std::vector<double> v(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
      v[i] = unsquash_from_bounds(u[i], layout_.act_low[i], layout_.act_high[i]);
    return log_prob_presquash_given_mean(net_.forward(obs_aug), v);
  }

  double log_prob_presquash_given_mean(std::span<const double> mean, std::span<const double> v) const {
    const double lp = gaussian_log_prob(mean, log_std(), v);
    return lp - squash_log_det(v, layout_.act_low, layout_.act_high);
  }

 private:
  PolicyLayout layout_;
  ParamBlock block_;
  Mlp net_;
  std::size_t log_std_offset_ = 0;
};

}  // namespace mmirl

#endif  // MMIRL_POLICY_HPP_
