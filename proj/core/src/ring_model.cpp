#include "nhring/ring_model.hpp"

#include <cmath>
#include <string>

#include "nhring/errors.hpp"

namespace nhring {

RingPotential RingPotential::from_coeffs(const std::map<int, Complex>& coeffs) {
  RingPotential p;
  for (const auto& [q, u] : coeffs) {
    if (!std::isfinite(u.real()) || !std::isfinite(u.imag())) {
      throw InvalidParameter("potential coefficient u_" + std::to_string(q) + " is not finite");
    }
    if (u != Complex{}) p.coeffs_.emplace(q, u);
  }
  return p;
}

Complex RingPotential::coeff(int q) const {
  const auto it = coeffs_.find(q);
  return it == coeffs_.end() ? Complex{} : it->second;
}

RingPotential make_reference_potential(double v0, double alpha) {
  if (!(v0 >= 0.0) || !std::isfinite(v0)) throw InvalidParameter("v0 must be finite and >= 0");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw InvalidParameter("alpha must be finite and >= 0");
  }
  RingPotential p = RingPotential::from_coeffs({{+1, v0 * (1.0 + alpha)}, {-1, v0 * (1.0 - alpha)}});
  p.descriptor_ = ReferenceProfile{v0, alpha};
  return p;
}

FluxProgram FluxProgram::constant(double f0) {
  if (!std::isfinite(f0)) throw InvalidParameter("static flux must be finite");
  return FluxProgram(StaticFlux{f0});
}

FluxProgram FluxProgram::ramp(double sigma, double tau0) {
  if (!std::isfinite(sigma) || sigma == 0.0) {
    throw InvalidParameter("ramp rate sigma must be finite and nonzero");
  }
  if (!std::isfinite(tau0)) throw InvalidParameter("ramp origin tau0 must be finite");
  return FluxProgram(RampFlux{sigma, tau0});
}

double FluxProgram::at(double tau) const {
  if (const auto* s = std::get_if<StaticFlux>(&kind_)) return s->f0;
  const auto& r = std::get<RampFlux>(kind_);
  return r.sigma * (tau - r.tau0);
}

double FluxProgram::phase_integral(int n, double tau) const {
  if (const auto* s = std::get_if<StaticFlux>(&kind_)) {
    const double d = n - s->f0;
    return d * d * tau;
  }
  // (n - sigma (t - tau0))^2 = (b - sigma t)^2 with b = n + sigma tau0, expanded
  // to avoid the cancellation in ((b)^3 - (b - sigma tau)^3) / (3 sigma).
  const auto& r = std::get<RampFlux>(kind_);
  const double b = n + r.sigma * r.tau0;
  return b * b * tau - b * r.sigma * tau * tau + r.sigma * r.sigma * tau * tau * tau / 3.0;
}

ModeWindow::ModeWindow(int n_min, int n_max) : n_min_(n_min), n_max_(n_max) {
  if (n_max - n_min + 1 < 3) {
    throw InvalidParameter("mode window [" + std::to_string(n_min) + ", " + std::to_string(n_max) +
                           "] must hold at least 3 modes");
  }
}

WaveState::WaveState(double tau_, ModeWindow window_, Eigen::VectorXcd amps_, Picture picture_)
    : tau(tau_), window(window_), amps(std::move(amps_)), picture(picture_) {
  if (amps.size() != window.size()) {
    throw InvalidParameter("amplitude vector length " + std::to_string(amps.size()) +
                           " does not match window size " + std::to_string(window.size()));
  }
}

WaveState WaveState::delta(ModeWindow window, int n0, double tau) {
  if (!window.contains(n0)) {
    throw InvalidParameter("initial winding number " + std::to_string(n0) + " outside window");
  }
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(window.size());
  amps[window.index(n0)] = 1.0;
  return WaveState(tau, window, std::move(amps));
}

double WaveState::mean_winding() const {
  double weight = 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < amps.size(); ++i) {
    const double p = std::norm(amps[i]);
    weight += window.mode(i) * p;
    total += p;
  }
  return total > 0.0 ? weight / total : 0.0;
}

WaveState WaveState::on_window(ModeWindow target) const {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(target.size());
  for (int n = target.n_min(); n <= target.n_max(); ++n) {
    if (window.contains(n)) out[target.index(n)] = amps[window.index(n)];
  }
  return WaveState(tau, target, std::move(out), picture);
}

double free_energy(int n, double f) noexcept {
  const double d = n - f;
  return d * d;
}

bool is_pt_symmetric(const RingPotential& p, double tol) {
  if (!(tol >= 0.0)) throw InvalidParameter("tolerance must be >= 0");
  for (const auto& [q, u] : p.coeffs()) {
    if (std::abs(u.imag()) > tol) return false;
  }
  return true;
}

std::vector<Complex> sample_potential(const RingPotential& p, std::span<const double> phis) {
  std::vector<Complex> out;
  out.reserve(phis.size());
  for (const double phi : phis) {
    Complex v{};
    for (const auto& [q, u] : p.coeffs()) v += u * std::polar(1.0, q * phi);
    out.push_back(v);
  }
  return out;
}

}  // namespace nhring
