#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "nhring/dynamics.hpp"
#include "nhring/ring_model.hpp"

namespace nhring {

// Crossing of diabatic levels n and n+1 under f = sigma tau.
struct LZEvent {
  int n;
  double tau_n;   // (2n + 1) / (2 sigma)
  double s_eff;   // sqrt(S1 S2)
  double p_zener;
};

// Events for n in [n_first, n_last], ordered by n. S1, S2 feed p_zener.
std::vector<LZEvent> crossing_times(double sigma, int n_first, int n_last, double s1 = 0.0,
                                    double s2 = 0.0);

// P_Z = 1 - exp(-pi S1 S2 / |sigma|). Rejects S1 S2 < 0 (broken PT phase).
double lz_probability(double s1, double s2, double sigma);

enum class GaugeDirection { ToHermitian, FromHermitian };

// c_n = a_n r^{n/2}, r = (1 + alpha) / (1 - alpha). FromHermitian maps a -> c.
WaveState gauge_map(const WaveState& s, double alpha, GaugeDirection direction);

// max |c_n(tau, -sigma) - c_{-n}(tau, sigma) r^n| over samples and modes
// above 1e-10 on either side. Both runs must share a mirror-symmetric window
// and their sample times.
double asymmetry_residual(const Trajectory& plus, const Trajectory& minus, double alpha);

// Step-function cascade for alpha = 1 in the interaction picture:
//   sigma > 0: a_n jumps at tau_{n-1} by -i S1 sqrt(pi / (i sigma))
//              exp(i sigma tau_{n-1}^2) a_{n-1}(tau_{n-1}) for n >= 1,
//   sigma < 0: same jump for n <= 0 but fed by a_{n-1}(0).
// Principal square root for both signs. taus must avoid crossing times.
AmplitudeTable asymptotic_amplitudes(double v0, double sigma, const std::map<int, Complex>& initial,
                                     std::span<const double> taus, ModeWindow modes);

// Jump factor -i S1 sqrt(pi / (i sigma)) of the cascade.
Complex asymptotic_jump(double s1, double sigma);

// Delayed-transparency protocol: ramp f = sigma (tau - tau0) freezes the
// occupations after T = (2M + 1) / (2 sigma) + tau0.
struct TransparencyPlan {
  int M;
  double sigma;
  double tau0;
  double T;
};

TransparencyPlan plan_transparency(int M, double sigma, double T_target);

// Isolated crossing of levels n and n+1:
//   i dc_n/dtau     = (n - sigma tau)^2 c_n + S2 c_{n+1}
//   i dc_{n+1}/dtau = (n + 1 - sigma tau)^2 c_{n+1} + S1 c_n
// integrated over tau_span from `initial`. The common energy is removed
// during integration and its phase restored in closed form.
std::array<Complex, 2> two_level_lz(double s1, double s2, int n, double sigma,
                                    std::pair<double, double> tau_span,
                                    std::array<Complex, 2> initial = {Complex{1.0}, Complex{}},
                                    const PropagatorConfig& cfg = {});

// Span tau_n -/+ margin_scale / sqrt(|sigma|).
std::pair<double, double> crossing_span(int n, double sigma, double margin_scale);

// Columns: n, tau_n, p_zener
void write_crossings_csv(std::ostream& os, const std::vector<LZEvent>& events);

}  // namespace nhring
