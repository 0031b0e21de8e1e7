#pragma once

// Adaptive stepping shared by the multilevel and two-level propagators.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "nhring/errors.hpp"

namespace nhring::detail {

using OdeState = std::vector<std::complex<double>>;

struct StepControl {
  double rtol;
  double atol;
  double max_step;
};

// Advances x from t0 through every time in samples (ascending, >= t0) with
// the embedded Fehlberg 7(8) pair. Error per step is held to
// atol + rtol |x_i| componentwise. on_step(t, x) runs after every accepted
// step, on_sample(k, x) once sample k is reached exactly.
template <class Rhs, class OnStep, class OnSample>
void integrate_samples(Rhs&& rhs, OdeState& x, double t0, std::span<const double> samples,
                       const StepControl& ctl, OnStep&& on_step, OnSample&& on_sample) {
  namespace odeint = boost::numeric::odeint;
  using Stepper = odeint::runge_kutta_fehlberg78<OdeState>;
  using Checker = odeint::default_error_checker<double, odeint::range_algebra,
                                                odeint::default_operations>;
  odeint::controlled_runge_kutta<Stepper> stepper(Checker(ctl.atol, ctl.rtol, 1.0, 0.0));

  auto system = [&rhs](const OdeState& in, OdeState& out, double t) { rhs(in, out, t); };

  double t = t0;
  double dt = std::min(ctl.max_step, 1e-2);
  constexpr int kMaxRejects = 1000;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double target = samples[k];
    int rejects = 0;
    while (t < target) {
      const double remaining = target - t;
      const bool clipped = dt >= remaining;
      double h = std::min(clipped ? remaining : dt, ctl.max_step);
      const double t_before = t;
      const auto result = stepper.try_step(system, x, t, h);
      if (result == odeint::success) {
        rejects = 0;
        if (clipped) {
          t = target;
          dt = std::max(dt, std::min(h, ctl.max_step));
        } else {
          dt = std::min(h, ctl.max_step);
        }
        on_step(t, x);
      } else {
        dt = h;
        const double floor = 64.0 * std::numeric_limits<double>::epsilon() *
                             std::max(1.0, std::abs(t_before));
        if (dt < floor || ++rejects > kMaxRejects) {
          std::ostringstream msg;
          msg << "step size underflow at tau = " << t_before << " (dt = " << dt << ")";
          throw StepUnderflow(msg.str(), t_before, dt);
        }
      }
    }
    on_sample(k, x);
  }
}

}  // namespace nhring::detail
