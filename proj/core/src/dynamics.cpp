#include "nhring/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "integrator.hpp"
#include "nhring/csv.hpp"
#include "nhring/errors.hpp"

namespace nhring {
namespace {

constexpr Complex kI{0.0, 1.0};

struct Coupling {
  Eigen::Index col;
  Complex u;
};

// Off-diagonal part of the momentum-space Hamiltonian, row by row.
std::vector<std::vector<Coupling>> coupling_rows(const RingPotential& p, ModeWindow window) {
  std::vector<std::vector<Coupling>> rows(static_cast<std::size_t>(window.size()));
  for (Eigen::Index i = 0; i < window.size(); ++i) {
    const int n = window.mode(i);
    for (const auto& [q, u] : p.coeffs()) {
      if (q == 0) continue;
      if (window.contains(n - q)) rows[static_cast<std::size_t>(i)].push_back({window.index(n - q), u});
    }
  }
  return rows;
}

WaveState apply_dynamical_phase(const WaveState& s, const FluxProgram& flux, double sign,
                                Picture target) {
  Eigen::VectorXcd out(s.amps.size());
  for (Eigen::Index i = 0; i < s.amps.size(); ++i) {
    out[i] = s.amps[i] * std::polar(1.0, sign * flux.phase_integral(s.window.mode(i), s.tau));
  }
  return WaveState(s.tau, s.window, std::move(out), target);
}

// Sum of terms exp(i freq xi) * poly(xi), poly coefficients in ascending powers.
struct ExpPolyTerm {
  double freq;
  std::vector<Complex> poly;
};
using ExpPoly = std::vector<ExpPolyTerm>;

constexpr double kResonanceTol = 1e-12;

void add_term(ExpPoly& acc, double freq, const std::vector<Complex>& poly) {
  auto it = std::find_if(acc.begin(), acc.end(), [&](const ExpPolyTerm& t) {
    return std::abs(t.freq - freq) < kResonanceTol;
  });
  if (it == acc.end()) {
    acc.push_back({std::abs(freq) < kResonanceTol ? 0.0 : freq, poly});
    return;
  }
  if (it->poly.size() < poly.size()) it->poly.resize(poly.size());
  for (std::size_t k = 0; k < poly.size(); ++k) it->poly[k] += poly[k];
}

// int_0^tau g(xi) exp(i omega xi) dxi for g given as an ExpPoly, in closed form.
ExpPoly integrate_with_phase(const ExpPoly& g, double omega) {
  ExpPoly out;
  for (const auto& term : g) {
    const double nu = term.freq + omega;
    const std::size_t deg = term.poly.size();
    if (std::abs(nu) < kResonanceTol) {
      std::vector<Complex> q(deg + 1);
      for (std::size_t k = 0; k < deg; ++k) q[k + 1] = term.poly[k] / static_cast<double>(k + 1);
      add_term(out, 0.0, q);
      continue;
    }
    // int xi^k e^{i nu xi} = e^{i nu xi} sum_j (-1)^j k!/(k-j)! xi^{k-j} / (i nu)^{j+1}
    const Complex inu = kI * nu;
    std::vector<Complex> r(deg);
    for (std::size_t k = 0; k < deg; ++k) {
      if (term.poly[k] == Complex{}) continue;
      double falling = 1.0;  // k! / (k-j)!
      Complex denom = inu;   // (i nu)^{j+1}
      for (std::size_t j = 0; j <= k; ++j) {
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        r[k - j] += term.poly[k] * sign * falling / denom;
        falling *= static_cast<double>(k - j);
        denom *= inu;
      }
    }
    add_term(out, nu, r);
    add_term(out, 0.0, {-r[0]});
  }
  return out;
}

Complex evaluate(const ExpPoly& g, double tau) {
  Complex sum{};
  for (const auto& term : g) {
    Complex p{};
    for (auto it = term.poly.rbegin(); it != term.poly.rend(); ++it) p = p * tau + *it;
    sum += p * std::polar(1.0, term.freq * tau);
  }
  return sum;
}

}  // namespace

void PropagatorConfig::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0)) throw InvalidParameter("rtol and atol must be positive");
  if (!(max_step > 0.0)) throw InvalidParameter("max_step must be positive");
  if (!(boundary_guard > 0.0 && boundary_guard < 1.0)) {
    throw InvalidParameter("boundary_guard must lie in (0, 1)");
  }
}

std::vector<double> uniform_samples(std::pair<double, double> tau_span, int samples) {
  const auto [a, b] = tau_span;
  if (!(b > a)) throw InvalidParameter("tau_span must satisfy start < end");
  if (samples < 2) throw InvalidParameter("need at least 2 samples");
  std::vector<double> out(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) out[static_cast<std::size_t>(k)] = a + (b - a) * k / (samples - 1);
  out.back() = b;
  return out;
}

double boundary_fraction(const WaveState& s) {
  const Eigen::Index n = s.amps.size();
  const double total = s.amps.squaredNorm();
  if (total == 0.0) return 0.0;
  const double edge =
      std::norm(s.amps[0]) + std::norm(s.amps[1]) + std::norm(s.amps[n - 2]) + std::norm(s.amps[n - 1]);
  return edge / total;
}

Trajectory evolve(const RingPotential& p, const FluxProgram& flux, ModeWindow window,
                  const WaveState& initial, std::span<const double> sample_times,
                  const PropagatorConfig& cfg) {
  cfg.validate();
  if (initial.window != window) throw InvalidParameter("initial state window differs from run window");
  if (initial.picture != Picture::Direct) throw InvalidParameter("evolve expects a direct-picture initial state");
  if (sample_times.empty()) throw InvalidParameter("no sample times given");
  for (std::size_t k = 1; k < sample_times.size(); ++k) {
    if (!(sample_times[k] > sample_times[k - 1])) {
      throw InvalidParameter("sample times must be strictly increasing");
    }
  }

  const auto rows = coupling_rows(p, window);
  const int n_min = window.n_min();
  const Complex u0 = p.coeff(0);
  auto rhs = [&](const detail::OdeState& c, detail::OdeState& dcdt, double tau) {
    const double f = flux.at(tau);
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double d = (n_min + static_cast<int>(i)) - f;
      Complex h = (d * d + u0) * c[i];
      for (const auto& cp : rows[i]) h += cp.u * c[static_cast<std::size_t>(cp.col)];
      dcdt[i] = Complex{h.imag(), -h.real()};  // -i h
    }
  };

  Trajectory traj;
  traj.times.assign(sample_times.begin(), sample_times.end());
  traj.states.reserve(sample_times.size());

  auto guard = [&](double tau, const detail::OdeState& x) {
    const WaveState probe(tau, window, Eigen::Map<const Eigen::VectorXcd>(x.data(), static_cast<Eigen::Index>(x.size())));
    const double frac = boundary_fraction(probe);
    traj.max_boundary_fraction = std::max(traj.max_boundary_fraction, frac);
    if (frac > cfg.boundary_guard) {
      std::ostringstream msg;
      msg << "boundary mass " << frac << " exceeds guard " << cfg.boundary_guard << " at tau = " << tau
          << " on window [" << window.n_min() << ", " << window.n_max()
          << "]; widen the window toward the drift direction";
      throw BoundaryMassExceeded(msg.str(), tau, frac);
    }
  };

  detail::OdeState x(initial.amps.data(), initial.amps.data() + initial.amps.size());
  guard(sample_times.front(), x);
  const detail::StepControl ctl{cfg.rtol, cfg.atol, cfg.max_step};
  detail::integrate_samples(
      rhs, x, sample_times.front(), sample_times, ctl, guard, [&](std::size_t k, const detail::OdeState& xs) {
        WaveState s(sample_times[k], window,
                    Eigen::Map<const Eigen::VectorXcd>(xs.data(), static_cast<Eigen::Index>(xs.size())));
        traj.norms.push_back(s.norm2());
        traj.mean_winding.push_back(s.mean_winding());
        traj.states.push_back(std::move(s));
      });
  return traj;
}

Trajectory evolve(const RingPotential& p, const FluxProgram& flux, ModeWindow window,
                  const WaveState& initial, std::pair<double, double> tau_span,
                  const PropagatorConfig& cfg, int samples) {
  const auto times = uniform_samples(tau_span, samples);
  return evolve(p, flux, window, initial, std::span<const double>(times), cfg);
}

ModeWindow auto_window(const WaveState& initial, const FluxProgram& flux,
                       std::pair<double, double> tau_span, int margin) {
  if (margin < 0) throw InvalidParameter("window margin must be >= 0");
  const double total = initial.norm2();
  if (!(total > 0.0)) throw InvalidParameter("initial state has zero norm");
  const double tail = 0.5e-12 * total;

  Eigen::Index lo = 0;
  for (double acc = 0.0; lo < initial.amps.size(); ++lo) {
    acc += std::norm(initial.amps[lo]);
    if (acc > tail) break;
  }
  Eigen::Index hi = initial.amps.size() - 1;
  for (double acc = 0.0; hi > 0; --hi) {
    acc += std::norm(initial.amps[hi]);
    if (acc > tail) break;
  }
  int n_lo = initial.window.mode(lo) - margin;
  int n_hi = initial.window.mode(hi) + margin;

  if (const auto* ramp = std::get_if<RampFlux>(&flux.kind())) {
    const int drift = static_cast<int>(std::ceil(std::abs(ramp->sigma) * (tau_span.second - tau_span.first)));
    (ramp->sigma > 0.0 ? n_hi : n_lo) += (ramp->sigma > 0.0 ? drift : -drift);
  }
  return ModeWindow(n_lo, n_hi);
}

WaveState to_interaction_picture(const WaveState& s, const FluxProgram& flux) {
  if (s.picture == Picture::Interaction) return s;
  return apply_dynamical_phase(s, flux, +1.0, Picture::Interaction);
}

WaveState from_interaction_picture(const WaveState& s, const FluxProgram& flux) {
  if (s.picture == Picture::Direct) return s;
  return apply_dynamical_phase(s, flux, -1.0, Picture::Direct);
}

std::vector<Complex> reconstruct_wavefunction(const WaveState& s, std::span<const double> phis) {
  if (s.picture != Picture::Direct) {
    throw InvalidParameter("wavefunction reconstruction needs direct-picture amplitudes");
  }
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  std::vector<Complex> psi;
  psi.reserve(phis.size());
  for (const double phi : phis) {
    Complex sum{};
    for (Eigen::Index i = 0; i < s.amps.size(); ++i) {
      sum += s.amps[i] * std::polar(1.0, s.window.mode(i) * phi);
    }
    psi.push_back(norm * sum);
  }
  return psi;
}

Complex AmplitudeTable::at(int n, std::size_t k) const {
  if (n < n_first || n > n_last()) return {};
  return values(n - n_first, static_cast<Eigen::Index>(k));
}

AmplitudeTable triangular_oracle(double v0, double f, int n0, std::span<const double> taus, int n_top) {
  if (n_top < n0) throw InvalidParameter("n_top must be >= n0");
  const double s1 = 2.0 * v0;

  AmplitudeTable table;
  table.n_first = n0;
  table.taus.assign(taus.begin(), taus.end());
  table.values.resize(n_top - n0 + 1, static_cast<Eigen::Index>(taus.size()));

  ExpPoly current{{0.0, {Complex{1.0}}}};
  for (int n = n0;; ++n) {
    for (std::size_t k = 0; k < taus.size(); ++k) {
      table.values(n - n0, static_cast<Eigen::Index>(k)) = evaluate(current, taus[k]);
    }
    if (n == n_top) break;
    const int next = n + 1;
    ExpPoly integrated = integrate_with_phase(current, 2.0 * next - 2.0 * f - 1.0);
    for (auto& term : integrated)
      for (auto& c : term.poly) c *= -kI * s1;
    current = std::move(integrated);
  }
  return table;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "tau,n,re_c,im_c,abs2\n";
  for (const auto& s : traj.states) {
    for (Eigen::Index i = 0; i < s.amps.size(); ++i) {
      const Complex c = s.amps[i];
      csv::row(os, s.tau, s.window.mode(i), c.real(), c.imag(), std::norm(c));
    }
  }
}

void write_wavefunction_csv(std::ostream& os, const Trajectory& traj, std::span<const double> phis) {
  os << "tau,phi,re_psi,im_psi,abs2\n";
  for (const auto& s : traj.states) {
    const auto psi = reconstruct_wavefunction(s, phis);
    for (std::size_t j = 0; j < phis.size(); ++j) {
      csv::row(os, s.tau, phis[j], psi[j].real(), psi[j].imag(), std::norm(psi[j]));
    }
  }
}

}  // namespace nhring
