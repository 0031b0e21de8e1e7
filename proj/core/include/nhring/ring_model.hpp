#pragma once

// Particle on a flux-threaded ring with a complex periodic potential.
//
// Units: energies are measured in eps0 = hbar^2 / (2 m R^2) and time is the
// normalized tau = hbar t / (2 m R^2). The potential enters only through its
// dimensionless Fourier amplitudes u_q = V_q / eps0, so that for the reference
// family V0 cos(phi) + i alpha V0 sin(phi) one has u_{+1} = v0 (1 + alpha) and
// u_{-1} = v0 (1 - alpha) with v0 = V0 m R^2 / hbar^2. Nothing downstream of
// this header sees SI values.

#include <complex>
#include <map>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace nhring {

using Complex = std::complex<double>;

struct ReferenceProfile {
  double v0 = 0.0;
  double alpha = 0.0;
};

// Sparse Fourier representation of the ring potential; only nonzero
// harmonics are stored.
class RingPotential {
 public:
  RingPotential() = default;

  // Zero entries are dropped.
  static RingPotential from_coeffs(const std::map<int, Complex>& coeffs);

  const std::map<int, Complex>& coeffs() const noexcept { return coeffs_; }
  Complex coeff(int q) const;
  bool empty() const noexcept { return coeffs_.empty(); }

  const std::optional<ReferenceProfile>& descriptor() const noexcept { return descriptor_; }

 private:
  friend RingPotential make_reference_potential(double v0, double alpha);

  std::map<int, Complex> coeffs_;
  std::optional<ReferenceProfile> descriptor_;
};

// u_{+1} = v0 (1 + alpha), u_{-1} = v0 (1 - alpha).
RingPotential make_reference_potential(double v0, double alpha);

struct StaticFlux {
  double f0 = 0.0;
};

// f(tau) = sigma (tau - tau0)
struct RampFlux {
  double sigma = 0.0;
  double tau0 = 0.0;
};

class FluxProgram {
 public:
  static FluxProgram constant(double f0);
  static FluxProgram ramp(double sigma, double tau0 = 0.0);

  double at(double tau) const;

  // Closed-form dynamical phase: integral of (n - f(t))^2 over [0, tau].
  double phase_integral(int n, double tau) const;

  bool is_ramp() const noexcept { return std::holds_alternative<RampFlux>(kind_); }
  const std::variant<StaticFlux, RampFlux>& kind() const noexcept { return kind_; }

 private:
  explicit FluxProgram(std::variant<StaticFlux, RampFlux> kind) : kind_(kind) {}

  std::variant<StaticFlux, RampFlux> kind_;
};

// Inclusive range of winding numbers kept after truncation.
class ModeWindow {
 public:
  ModeWindow(int n_min, int n_max);

  int n_min() const noexcept { return n_min_; }
  int n_max() const noexcept { return n_max_; }
  int size() const noexcept { return n_max_ - n_min_ + 1; }
  bool contains(int n) const noexcept { return n >= n_min_ && n <= n_max_; }
  Eigen::Index index(int n) const noexcept { return n - n_min_; }
  int mode(Eigen::Index i) const noexcept { return n_min_ + static_cast<int>(i); }

  friend bool operator==(const ModeWindow&, const ModeWindow&) = default;

 private:
  int n_min_;
  int n_max_;
};

enum class Picture { Direct, Interaction };

struct WaveState {
  double tau = 0.0;
  ModeWindow window;
  Eigen::VectorXcd amps;
  Picture picture = Picture::Direct;

  WaveState(double tau, ModeWindow window, Eigen::VectorXcd amps,
            Picture picture = Picture::Direct);

  // c_n(0) = delta_{n,n0}
  static WaveState delta(ModeWindow window, int n0, double tau = 0.0);

  Complex amp(int n) const { return window.contains(n) ? amps[window.index(n)] : Complex{}; }
  double norm2() const { return amps.squaredNorm(); }
  double mean_winding() const;

  // Same amplitudes on another window; modes outside the overlap are zero.
  WaveState on_window(ModeWindow target) const;
};

// (n - f)^2 in units of eps0.
double free_energy(int n, double f) noexcept;

// V(-phi) = V*(phi), i.e. every Fourier coefficient real within tol.
bool is_pt_symmetric(const RingPotential& p, double tol);

// V(phi)/eps0 = sum_q u_q exp(i q phi)
std::vector<Complex> sample_potential(const RingPotential& p, std::span<const double> phis);

}  // namespace nhring
