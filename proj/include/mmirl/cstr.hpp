#ifndef MMIRL_CSTR_HPP_
#define MMIRL_CSTR_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmirl/env.hpp"
#include "mmirl/ode.hpp"
#include "mmirl/rng.hpp"

namespace mmirl {

/// Jacketed, non-adiabatic CSTR with a single irreversible exothermic
/// first-order reaction A -> B. Time in seconds, temperatures in Celsius,
/// concentration in mol/L. The manipulated variable is the coolant valve
/// opening in percent; coolant flow is linear in the opening.
///
///   dCa/dt = (Caf_eff - Ca)/tau_r - k(T) Ca
///   dT/dt  = (Tf - T)/tau_r + J k(T) Ca - Ur (T - Tc)
///   dTc/dt = wmax (b/100) (Tcf - Tc) + Uc (T - Tc)
///   k(T)   = k0 exp(-E_R / (T + 273.15))
///
/// The feed temperature Tf and the nominal steady state (Ca*, Tc*) follow
/// from the remaining constants by requiring all derivatives to vanish at
/// T = t_nominal with the valve at b_nominal.
struct CstrParams {
  double tau_r = 300.0;       // reactor residence time, s
  double k0 = 1.2e9;          // Arrhenius pre-exponential, 1/s
  double e_over_r = 8750.0;   // activation energy over gas constant, K
  double caf = 1.0;           // nominal inlet concentration, mol/L
  double heat_gain = 60.0;    // (-dH)/(rho cp), K L / mol
  double ur = 0.004;          // UA/(V rho cp), 1/s
  double uc = 0.06;           // UA/(Vc rho_c cp_c), 1/s
  double tcf = 20.0;          // coolant inlet temperature, C
  double wmax = 0.09;         // coolant flow / jacket volume at 100% valve, 1/s
  double t_nominal = 88.0;    // steady reactor temperature, C
  double b_nominal = 50.0;    // steady valve opening, %

  double arrhenius(double t_c) const { return k0 * std::exp(-e_over_r / (t_c + 273.15)); }

  struct SteadyState {
    double ca, t, tc, tf, b;
  };

  // Exact steady state at (t_nominal, b_nominal); also yields the feed
  // temperature that balances the energy equation there.
  SteadyState calibrate() const {
    const double kT = arrhenius(t_nominal);
    const double ca = caf / (1.0 + tau_r * kT);
    const double w = wmax * b_nominal / 100.0;
    const double tc = (w * tcf + uc * t_nominal) / (w + uc);
    const double tf = t_nominal + tau_r * (ur * (t_nominal - tc) - heat_gain * kT * ca);
    return {ca, t_nominal, tc, tf, b_nominal};
  }
};

struct CstrConfig {
  CstrParams params;
  int horizon = 300;
  double dt = 10.0;           // control interval, s
  int substeps = 10;
  double noise_std_frac = 0.02;  // inlet concentration white noise, fraction of caf
  double t_jitter = 0.2;         // uniform reset jitter on T, C
  std::vector<double> setpoints = {90.0, 86.0};
  double move_cost = 0.01;       // lambda_u on (delta valve)^2
  std::vector<double> norm_center;  // empty -> built-in
  std::vector<double> norm_scale;
};

struct CstrState {
  double ca = 0.0;
  double t = 0.0;
  double tc = 0.0;
  double b = 0.0;          // currently applied valve opening (zero-order hold)
  double setpoint = 0.0;
  int t_index = 0;
};

inline void cstr_rhs(std::span<const double> x, double valve, const CstrParams& p, double tf,
                     double caf_eff, std::span<double> dxdt) {
  const double ca = x[0], t = x[1], tc = x[2];
  const double kT = p.arrhenius(t);
  dxdt[0] = (caf_eff - ca) / p.tau_r - kT * ca;
  dxdt[1] = (tf - t) / p.tau_r + p.heat_gain * kT * ca - p.ur * (t - tc);
  dxdt[2] = p.wmax * (valve / 100.0) * (p.tcf - tc) + p.uc * (t - tc);
}

class CstrEnv final : public Env {
 public:
  explicit CstrEnv(CstrConfig cfg = {}) : cfg_(std::move(cfg)) {
    steady_ = cfg_.params.calibrate();
    tf_ = steady_.tf;
    spec_.id = "cstr";
    spec_.state_dim = 5;  // [Ca, T, Tc, b, Tset - T]
    spec_.action_dim = 1;
    spec_.action_low = {0.0};
    spec_.action_high = {100.0};
    spec_.horizon = cfg_.horizon;
    spec_.mode_count = static_cast<int>(cfg_.setpoints.size());
    spec_.dt = cfg_.dt;
    spec_.norm_center = cfg_.norm_center.empty()
                            ? std::vector<double>{steady_.ca, steady_.t, steady_.tc, steady_.b, 0.0}
                            : cfg_.norm_center;
    spec_.norm_scale = cfg_.norm_scale.empty()
                           ? std::vector<double>{0.05, 5.0, 10.0, 25.0, 2.5}
                           : cfg_.norm_scale;
    spec_.validate();
  }

  const EnvSpec& spec() const override { return spec_; }
  int mode() const override { return mode_; }
  bool done() const override { return aborted_ || state_.t_index >= cfg_.horizon; }
  const CstrState& state() const { return state_; }
  const CstrParams::SteadyState& steady_state() const { return steady_; }

  void reset(int mode, std::uint64_t seed) override {
    if (mode < 0 || mode >= spec_.mode_count) throw std::out_of_range("CstrEnv::reset: bad mode");
    mode_ = mode;
    rng_ = Rng(seed);
    aborted_ = false;
    state_ = CstrState{};
    state_.ca = steady_.ca;
    state_.t = steady_.t + rng_.uniform(-cfg_.t_jitter, cfg_.t_jitter);
    state_.tc = steady_.tc;
    state_.b = steady_.b;
    state_.setpoint = cfg_.setpoints[static_cast<std::size_t>(mode)];
  }

  StepResult step(std::span<const double> action) override {
    if (done()) throw std::logic_error("CstrEnv::step: episode already finished");
    const double valve = clip_action(action, spec_)[0];
    // white noise on the inlet concentration, held over the control interval
    const double caf_eff = cfg_.params.caf + rng_.normal(0.0, cfg_.noise_std_frac * cfg_.params.caf);

    std::array<double, 3> x = {state_.ca, state_.t, state_.tc};
    const CstrParams& p = cfg_.params;
    rk4_advance(x, cfg_.dt, cfg_.substeps,
                [&](const std::array<double, 3>& xx, std::array<double, 3>& dx) {
                  cstr_rhs(xx, valve, p, tf_, caf_eff, dx);
                });

    StepResult res;
    if (!(std::isfinite(x[0]) && std::isfinite(x[1]) && std::isfinite(x[2]))) {
      aborted_ = true;
      res.aborted = true;
      res.done = true;
      res.abort_reason = "non-finite state after integration at step " + std::to_string(state_.t_index);
      return res;
    }

    const double dvalve = valve - state_.b;
    state_.ca = x[0];
    state_.t = x[1];
    state_.tc = x[2];
    state_.b = valve;
    state_.t_index += 1;

    const double err = state_.setpoint - state_.t;
    res.reward = -err * err - cfg_.move_cost * dvalve * dvalve;
    res.done = state_.t_index >= cfg_.horizon;
    return res;
  }

  std::vector<double> observe_raw() const override {
    return {state_.ca, state_.t, state_.tc, state_.b, state_.setpoint - state_.t};
  }

  std::unique_ptr<Env> clone() const override { return std::make_unique<CstrEnv>(*this); }

 private:
  CstrConfig cfg_;
  EnvSpec spec_;
  CstrParams::SteadyState steady_;
  double tf_ = 0.0;
  CstrState state_;
  int mode_ = 0;
  bool aborted_ = false;
  Rng rng_{0};
};

}  // namespace mmirl

#endif  // MMIRL_CSTR_HPP_
