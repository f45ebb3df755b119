#ifndef MMIRL_ENV_HPP_
#define MMIRL_ENV_HPP_

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmirl {

struct EnvSpec {
  std::string id;
  int state_dim = 0;
  int action_dim = 0;
  std::vector<double> action_low;
  std::vector<double> action_high;
  int horizon = 0;
  int mode_count = 0;
  double dt = 0.0;  // time units per control step
  std::vector<double> norm_center;  // affine observation normalization
  std::vector<double> norm_scale;

  void validate() const {
    if (state_dim <= 0 || action_dim <= 0) throw std::invalid_argument("EnvSpec: dims must be positive");
    if (horizon < 1) throw std::invalid_argument("EnvSpec: horizon must be >= 1");
    if (mode_count < 1) throw std::invalid_argument("EnvSpec: mode_count must be >= 1");
    if (action_low.size() != static_cast<std::size_t>(action_dim) ||
        action_high.size() != static_cast<std::size_t>(action_dim))
      throw std::invalid_argument("EnvSpec: action bound dims");
    for (int i = 0; i < action_dim; ++i)
      if (!(action_low[static_cast<std::size_t>(i)] < action_high[static_cast<std::size_t>(i)]))
        throw std::invalid_argument("EnvSpec: action_low must be < action_high elementwise");
    if (norm_center.size() != static_cast<std::size_t>(state_dim) ||
        norm_scale.size() != static_cast<std::size_t>(state_dim))
      throw std::invalid_argument("EnvSpec: normalization constant dims");
    for (double s : norm_scale)
      if (s <= 0.0) throw std::invalid_argument("EnvSpec: norm_scale entries must be positive");
  }
};

struct StepResult {
  double reward = 0.0;
  bool done = false;
  bool aborted = false;
  std::string abort_reason;
};

/// Step-based simulation of one controlled process. Instances are
/// independent and may be stepped concurrently; each owns an RNG stream
/// seeded at reset.
class Env {
 public:
  virtual ~Env() = default;

  virtual const EnvSpec& spec() const = 0;
  virtual void reset(int mode, std::uint64_t seed) = 0;
  virtual StepResult step(std::span<const double> action) = 0;
  virtual std::vector<double> observe_raw() const = 0;
  virtual std::unique_ptr<Env> clone() const = 0;
  virtual int mode() const = 0;
  virtual bool done() const = 0;

  /// Raw observation mapped channel-wise through (x - center) / scale.
  std::vector<double> observe() const {
    std::vector<double> x = observe_raw();
    const EnvSpec& s = spec();
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = (x[i] - s.norm_center[i]) / s.norm_scale[i];
    return x;
  }

  std::vector<double> denormalize(std::span<const double> obs) const {
    const EnvSpec& s = spec();
    std::vector<double> x(obs.begin(), obs.end());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = x[i] * s.norm_scale[i] + s.norm_center[i];
    return x;
  }
};

inline std::vector<double> clip_action(std::span<const double> action, const EnvSpec& spec) {
  if (action.size() != static_cast<std::size_t>(spec.action_dim))
    throw std::invalid_argument("clip_action: action dim mismatch");
  std::vector<double> a(action.begin(), action.end());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < spec.action_low[i]) a[i] = spec.action_low[i];
    if (a[i] > spec.action_high[i]) a[i] = spec.action_high[i];
  }
  return a;
}

}  // namespace mmirl

#endif  // MMIRL_ENV_HPP_
