#pragma once

#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "nhring/ring_model.hpp"

namespace nhring {

struct PropagatorConfig {
  double rtol = 1e-9;
  double atol = 1e-12;
  double max_step = 1.0;
  // Largest tolerated fraction of the probability in the two outermost
  // modes at each end of the window.
  double boundary_guard = 1e-8;

  void validate() const;
};

inline constexpr int kDefaultSamples = 400;

struct Trajectory {
  std::vector<double> times;
  std::vector<WaveState> states;
  std::vector<double> norms;         // sum |c_n|^2
  std::vector<double> mean_winding;  // sum n |c_n|^2 / sum |c_n|^2
  double max_boundary_fraction = 0.0;

  const ModeWindow& window() const { return states.front().window; }
  std::size_t size() const noexcept { return times.size(); }
};

// Integrates i dc_n/dtau = (n - f(tau))^2 c_n + sum_q u_q c_{n-q} on the
// window, starting from initial's amplitudes at sample_times.front().
// Throws BoundaryMassExceeded when the edge-mode fraction passes
// cfg.boundary_guard, StepUnderflow if the step controller stalls.
Trajectory evolve(const RingPotential& p, const FluxProgram& flux, ModeWindow window,
                  const WaveState& initial, std::span<const double> sample_times,
                  const PropagatorConfig& cfg = {});

// Same, sampled at `samples` uniformly spaced times covering tau_span.
Trajectory evolve(const RingPotential& p, const FluxProgram& flux, ModeWindow window,
                  const WaveState& initial, std::pair<double, double> tau_span,
                  const PropagatorConfig& cfg = {}, int samples = kDefaultSamples);

std::vector<double> uniform_samples(std::pair<double, double> tau_span, int samples);

// Fraction of sum |c_n|^2 held by the two outermost modes at each end.
double boundary_fraction(const WaveState& s);

// Window for a ramped run: the modes carrying all but 1e-12 of the initial
// probability, padded by `margin`, and extended by ceil(|sigma| * span) modes
// in the direction the ramp drives the population.
ModeWindow auto_window(const WaveState& initial, const FluxProgram& flux,
                       std::pair<double, double> tau_span, int margin = 6);

// a_n = c_n exp(+i int_0^tau (n - f)^2) and its inverse. Converting a state
// already in the requested picture returns it unchanged.
WaveState to_interaction_picture(const WaveState& s, const FluxProgram& flux);
WaveState from_interaction_picture(const WaveState& s, const FluxProgram& flux);

// psi(phi) = (2 pi)^{-1/2} sum_n c_n exp(i n phi); s must be direct-picture.
std::vector<Complex> reconstruct_wavefunction(const WaveState& s, std::span<const double> phis);

// Amplitudes for modes n_first..n_first + rows - 1 at each tau.
struct AmplitudeTable {
  int n_first = 0;
  std::vector<double> taus;
  Eigen::MatrixXcd values;  // values(n - n_first, k)

  int n_last() const noexcept { return n_first + static_cast<int>(values.rows()) - 1; }
  Complex at(int n, std::size_t k) const;
};

// Exact solution at alpha = 1 (single harmonic u_{+1} = S1 = 2 v0) and static
// flux f, starting from c_n(0) = delta_{n,n0}. Evaluates
//   c_n(tau) = -i S1 int_0^tau c_{n-1}(xi) exp(i (2n - 2f - 1) xi) dxi
// symbolically as sums of polynomial x exponential terms. Returned values
// are interaction-picture amplitudes (dynamical phase (n - f)^2 tau removed).
AmplitudeTable triangular_oracle(double v0, double f, int n0, std::span<const double> taus,
                                 int n_top);

// Columns: tau, n, re_c, im_c, abs2
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
// Columns: tau, phi, re_psi, im_psi, abs2
void write_wavefunction_csv(std::ostream& os, const Trajectory& traj, std::span<const double> phis);

}  // namespace nhring
