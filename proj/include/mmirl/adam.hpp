#ifndef MMIRL_ADAM_HPP_
#define MMIRL_ADAM_HPP_

#include <cmath>
#include <cstddef>
#include <vector>

#include "mmirl/param_block.hpp"

namespace mmirl {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected adaptive-moment optimizer state for one ParamBlock.
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}

  // One update from block.grads(). Returns false (and leaves values
  // untouched) when any gradient entry is non-finite; the skip is counted.
  bool step(ParamBlock& block, const AdamConfig& cfg) {
    if (m_.empty()) {
      m_.assign(block.size(), 0.0);
      v_.assign(block.size(), 0.0);
    }
    auto grads = block.grads();
    for (double g : grads) {
      if (!std::isfinite(g)) {
        ++skipped_;
        return false;
      }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t_));
    auto values = block.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grads[i];
      m_[i] = cfg.beta1 * m_[i] + (1.0 - cfg.beta1) * g;
      v_[i] = cfg.beta2 * v_[i] + (1.0 - cfg.beta2) * g * g;
      const double mhat = m_[i] / bc1;
      const double vhat = v_[i] / bc2;
      values[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
    return true;
  }

  long step_count() const { return t_; }
  long skipped_steps() const { return skipped_; }

  const std::vector<double>& first_moment() const { return m_; }
  const std::vector<double>& second_moment() const { return v_; }

  // Serialization hooks for checkpoint/resume.
  std::vector<double> pack() const {
    std::vector<double> out;
    out.reserve(m_.size() + v_.size() + 2);
    out.push_back(static_cast<double>(t_));
    out.push_back(static_cast<double>(skipped_));
    out.insert(out.end(), m_.begin(), m_.end());
    out.insert(out.end(), v_.begin(), v_.end());
    return out;
  }

  void unpack(std::span<const double> data) {
    if (data.size() < 2 || (data.size() - 2) % 2 != 0)
      throw std::invalid_argument("AdamState::unpack: bad payload size");
    t_ = static_cast<long>(data[0]);
    skipped_ = static_cast<long>(data[1]);
    const std::size_t n = (data.size() - 2) / 2;
    m_.assign(data.begin() + 2, data.begin() + 2 + n);
    v_.assign(data.begin() + 2 + n, data.end());
  }

 private:
  std::vector<double> m_;
  std::vector<double> v_;
  long t_ = 0;
  long skipped_ = 0;
};

}  // namespace mmirl

#endif  // MMIRL_ADAM_HPP_
