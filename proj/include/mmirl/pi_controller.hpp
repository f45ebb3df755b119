#ifndef MMIRL_PI_CONTROLLER_HPP_
#define MMIRL_PI_CONTROLLER_HPP_

#include <stdexcept>

#include "mmirl/numeric.hpp"

namespace mmirl {

/// Proportional-integral feedback law on the tracking error with output
/// clamping and anti-windup. Sign convention: error = T - T_set with a
/// cooling actuator, so a positive error opens the valve.
class PiController {
 public:
  PiController(double kc, double tau_i, double u0, double out_lo = 0.0, double out_hi = 100.0)
      : kc_(kc), tau_i_(tau_i), u0_(u0), out_lo_(out_lo), out_hi_(out_hi) {}

  /// Returns clamp(u0 + Kc e + (Kc/tau_I) * integral); the integral then
  /// advances by e*dt unless the output is saturated in the direction of
  /// the error.
  double control(double error, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("PiController::control: dt must be > 0");
    const double raw = u0_ + kc_ * error + (kc_ / tau_i_) * integral_;
    const double out = clamp(raw, out_lo_, out_hi_);
    const bool windup = (raw >= out_hi_ && error > 0.0) || (raw <= out_lo_ && error < 0.0);
    if (!windup) integral_ += error * dt;
    return out;
  }

  void reset() { integral_ = 0.0; }
  double integral() const { return integral_; }
  double kc() const { return kc_; }
  double tau_i() const { return tau_i_; }
  double u0() const { return u0_; }

 private:
  double kc_;
  double tau_i_;
  double u0_;
  double integral_ = 0.0;
  double out_lo_, out_hi_;
};

}  // namespace mmirl

#endif  // MMIRL_PI_CONTROLLER_HPP_
