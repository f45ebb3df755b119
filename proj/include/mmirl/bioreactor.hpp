#ifndef MMIRL_BIOREACTOR_HPP_
#define MMIRL_BIOREACTOR_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "mmirl/env.hpp"
#include "mmirl/ode.hpp"
#include "mmirl/rng.hpp"

namespace mmirl {

/// Fed-batch photo-production process. Two inputs (light intensity u1 and
/// inflow rate u2) drive reactant concentration y1 and product concentration
/// y2 over a batch horizon normalized to unit time:
///
///   dy1/dt = -(u1 + 0.5 u1^2) y1 + u2
///   dy2/dt =  u1 y1 - k u2 y1
///
/// The mode variable k scales the product sink. Reward is a small L1 penalty
/// on action changes at every step, plus the terminal product concentration
/// y2(T) at the last step.
struct BioreactorConfig {
  int horizon = 20;
  double dt = 0.05;
  int substeps = 10;
  double y1_jitter = 0.02;       // uniform reset jitter on y1
  std::vector<double> mode_k = {0.5, 0.7};
  double action_change_cost = 0.01;
};

inline void bioreactor_rhs(std::span<const double> y, std::span<const double> u, double k,
                           std::span<double> dydt) {
  const double y1 = y[0];
  const double u1 = u[0], u2 = u[1];
  dydt[0] = -(u1 + 0.5 * u1 * u1) * y1 + u2;
  dydt[1] = u1 * y1 - k * u2 * y1;
}

struct BioreactorState {
  double y1 = 1.0;
  double y2 = 0.0;
  int t_index = 0;
  std::array<double, 2> u_prev = {0.0, 0.0};
};

class BioreactorEnv final : public Env {
 public:
  explicit BioreactorEnv(BioreactorConfig cfg = {}) : cfg_(std::move(cfg)) {
    spec_.id = "bioreactor";
    spec_.state_dim = 2;
    spec_.action_dim = 2;
    spec_.action_low = {0.0, 0.0};
    spec_.action_high = {5.0, 5.0};
    spec_.horizon = cfg_.horizon;
    spec_.mode_count = static_cast<int>(cfg_.mode_k.size());
    spec_.dt = cfg_.dt;
    spec_.norm_center = {0.0, 0.0};
    spec_.norm_scale = {1.0, 1.0};
    spec_.validate();
  }

  const EnvSpec& spec() const override { return spec_; }
  int mode() const override { return mode_; }
  bool done() const override { return state_.t_index >= cfg_.horizon; }
  const BioreactorState& state() const { return state_; }

  void reset(int mode, std::uint64_t seed) override {
    if (mode < 0 || mode >= spec_.mode_count) throw std::out_of_range("BioreactorEnv::reset: bad mode");
    mode_ = mode;
    rng_ = Rng(seed);
    state_ = BioreactorState{};
    state_.y1 = 1.0 + rng_.uniform(-cfg_.y1_jitter, cfg_.y1_jitter);
  }

  StepResult step(std::span<const double> action) override {
    if (done()) throw std::logic_error("BioreactorEnv::step: episode already finished");
    const std::vector<double> u = clip_action(action, spec_);
    const double k = cfg_.mode_k[static_cast<std::size_t>(mode_)];

    std::array<double, 2> y = {state_.y1, state_.y2};
    rk4_advance(y, cfg_.dt, cfg_.substeps,
                [&](const std::array<double, 2>& yy, std::array<double, 2>& dy) {
                  bioreactor_rhs(yy, u, k, dy);
                });
    state_.y1 = y[0];
    state_.y2 = y[1];
    state_.t_index += 1;

    StepResult res;
    double move = 0.0;
    for (int i = 0; i < 2; ++i) move += std::abs(u[static_cast<std::size_t>(i)] - state_.u_prev[static_cast<std::size_t>(i)]);
    res.reward = -cfg_.action_change_cost * move;
    res.done = state_.t_index >= cfg_.horizon;
    if (res.done) res.reward += state_.y2;
    state_.u_prev = {u[0], u[1]};
    return res;
  }

  std::vector<double> observe_raw() const override { return {state_.y1, state_.y2}; }

  std::unique_ptr<Env> clone() const override { return std::make_unique<BioreactorEnv>(*this); }

 private:
  BioreactorConfig cfg_;
  EnvSpec spec_;
  BioreactorState state_;
  int mode_ = 0;
  Rng rng_{0};
};

}  // namespace mmirl

#endif  // MMIRL_BIOREACTOR_HPP_
