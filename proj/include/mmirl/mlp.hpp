#ifndef MMIRL_MLP_HPP_
#define MMIRL_MLP_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmirl/param_block.hpp"
#include "mmirl/rng.hpp"

namespace mmirl {

/// Activations recorded by a forward pass; consumed by backward().
struct MlpTrace {
  std::vector<double> input;
  std::vector<std::vector<double>> pre;   // pre-activation per layer
  std::vector<std::vector<double>> act;   // post-activation per layer (last = output)
  bool recorded = false;
};

/// Multilayer perceptron over a flat ParamBlock: tanh hidden layers,
/// identity output. Layer l holds W (out x in, row-major) then b (out).
class Mlp {
 public:
  Mlp() = default;

  Mlp(ParamBlock& block, int input_dim, std::vector<int> widths)
      : block_(&block), input_dim_(input_dim), widths_(std::move(widths)) {
    if (input_dim_ <= 0 || widths_.empty()) throw std::invalid_argument("Mlp: bad dimensions");
    int in = input_dim_;
    for (int w : widths_) {
      if (w <= 0) throw std::invalid_argument("Mlp: layer widths must be positive");
      w_offsets_.push_back(block.allocate(static_cast<std::size_t>(w), static_cast<std::size_t>(in)));
      b_offsets_.push_back(block.allocate(static_cast<std::size_t>(w), 1));
      in = w;
    }
  }

  int input_dim() const { return input_dim_; }
  int output_dim() const { return widths_.back(); }
  const std::vector<int>& widths() const { return widths_; }
  ParamBlock& block() { return *block_; }
  const ParamBlock& block() const { return *block_; }

  void init_xavier(Rng& rng, double output_scale = 1.0) {
    int in = input_dim_;
    for (std::size_t l = 0; l < widths_.size(); ++l) {
      const int out = widths_[l];
      const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
      const double scale = (l + 1 == widths_.size()) ? output_scale : 1.0;
      auto w = block_->values(w_offsets_[l], static_cast<std::size_t>(out) * in);
      for (double& x : w) x = scale * rng.uniform(-bound, bound);
      auto b = block_->values(b_offsets_[l], static_cast<std::size_t>(out));
      for (double& x : b) x = 0.0;
      in = out;
    }
  }

  std::vector<double> forward(std::span<const double> x) const {
    MlpTrace scratch;
    return forward_impl(x, scratch, false);
  }

  // Records the per-layer activations needed by backward().
  std::vector<double> forward(std::span<const double> x, MlpTrace& trace) const {
    return forward_impl(x, trace, true);
  }

  /// Accumulates d(loss)/d(param) into grad_out (sized like the block's
  /// flat storage) given d(loss)/d(output). Optionally also emits
  /// d(loss)/d(input) for chaining into upstream modules.
  void backward(const MlpTrace& trace, std::span<const double> d_out,
                std::span<double> grad_out, std::span<double> d_input = {}) const {
    if (!trace.recorded) throw std::logic_error("Mlp::backward called without a recorded forward");
    if (d_out.size() != static_cast<std::size_t>(output_dim()))
      throw std::invalid_argument("Mlp::backward: d_out size mismatch");
    if (grad_out.size() != block_->size())
      throw std::invalid_argument("Mlp::backward: gradient buffer size mismatch");

    const int n_layers = static_cast<int>(widths_.size());
    std::vector<double> delta(d_out.begin(), d_out.end());
    for (int l = n_layers - 1; l >= 0; --l) {
      const int out = widths_[l];
      const int in = (l == 0) ? input_dim_ : widths_[l - 1];
      // tanh derivative on every layer except the identity output
      if (l != n_layers - 1) {
        const auto& a = trace.act[static_cast<std::size_t>(l)];
        for (int i = 0; i < out; ++i) delta[static_cast<std::size_t>(i)] *= 1.0 - a[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(i)];
      }
      const std::vector<double>& below =
          (l == 0) ? trace.input : trace.act[static_cast<std::size_t>(l - 1)];
      const double* w = block_->values().data() + w_offsets_[static_cast<std::size_t>(l)];
      double* gw = grad_out.data() + w_offsets_[static_cast<std::size_t>(l)];
      double* gb = grad_out.data() + b_offsets_[static_cast<std::size_t>(l)];
      std::vector<double> d_below(static_cast<std::size_t>(in), 0.0);
      for (int i = 0; i < out; ++i) {
        const double d = delta[static_cast<std::size_t>(i)];
        gb[i] += d;
        const double* wrow = w + static_cast<std::size_t>(i) * in;
        double* gwrow = gw + static_cast<std::size_t>(i) * in;
        for (int j = 0; j < in; ++j) {
          gwrow[j] += d * below[static_cast<std::size_t>(j)];
          d_below[static_cast<std::size_t>(j)] += d * wrow[j];
        }
      }
      delta = std::move(d_below);
    }
    if (!d_input.empty()) {
      if (d_input.size() != static_cast<std::size_t>(input_dim_))
        throw std::invalid_argument("Mlp::backward: d_input size mismatch");
      for (int j = 0; j < input_dim_; ++j) d_input[static_cast<std::size_t>(j)] += delta[static_cast<std::size_t>(j)];
    }
  }

  // convenience: accumulate into the owning block's grad buffer
  void backward(const MlpTrace& trace, std::span<const double> d_out) const {
    backward(trace, d_out, block_->grads());
  }

 private:
  std::vector<double> forward_impl(std::span<const double> x, MlpTrace& trace, bool record) const {
    if (x.size() != static_cast<std::size_t>(input_dim_))
      throw std::invalid_argument("Mlp::forward: input has length " + std::to_string(x.size()) +
                                  ", expected " + std::to_string(input_dim_));
    if (record) {
      trace.input.assign(x.begin(), x.end());
      trace.pre.clear();
      trace.act.clear();
      trace.recorded = true;
    }
    std::vector<double> cur(x.begin(), x.end());
    const int n_layers = static_cast<int>(widths_.size());
    for (int l = 0; l < n_layers; ++l) {
      const int out = widths_[static_cast<std::size_t>(l)];
      const int in = static_cast<int>(cur.size());
      const double* w = block_->values().data() + w_offsets_[static_cast<std::size_t>(l)];
      const double* b = block_->values().data() + b_offsets_[static_cast<std::size_t>(l)];
      std::vector<double> next(static_cast<std::size_t>(out));
      for (int i = 0; i < out; ++i) {
        double s = b[i];
        const double* wrow = w + static_cast<std::size_t>(i) * in;
        for (int j = 0; j < in; ++j) s += wrow[j] * cur[static_cast<std::size_t>(j)];
        next[static_cast<std::size_t>(i)] = s;
      }
      if (record) trace.pre.push_back(next);
      if (l != n_layers - 1)
        for (double& v : next) v = std::tanh(v);
      if (record) trace.act.push_back(next);
      cur = std::move(next);
    }
    return cur;
  }

  ParamBlock* block_ = nullptr;
  int input_dim_ = 0;
  std::vector<int> widths_;
  std::vector<std::size_t> w_offsets_;
  std::vector<std::size_t> b_offsets_;
};

}  // namespace mmirl

#endif  // MMIRL_MLP_HPP_
