#include "nhring/lz_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "integrator.hpp"
#include "nhring/csv.hpp"
#include "nhring/errors.hpp"

namespace nhring {
namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kModeFloor = 1e-10;

double crossing_time(int n, double sigma) { return (2.0 * n + 1.0) / (2.0 * sigma); }

void require_nonzero_sigma(double sigma) {
  if (!std::isfinite(sigma) || sigma == 0.0) throw InvalidParameter("sigma must be finite and nonzero");
}

double gauge_ratio(double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw InvalidParameter("gauge map needs 0 <= alpha < 1 (it diverges at alpha = 1)");
  }
  return (1.0 + alpha) / (1.0 - alpha);
}

}  // namespace

std::vector<LZEvent> crossing_times(double sigma, int n_first, int n_last, double s1, double s2) {
  require_nonzero_sigma(sigma);
  if (n_last < n_first) throw InvalidParameter("empty crossing range");
  const double p = lz_probability(s1, s2, sigma);
  const double s_eff = std::sqrt(s1 * s2);
  std::vector<LZEvent> out;
  out.reserve(static_cast<std::size_t>(n_last - n_first + 1));
  for (int n = n_first; n <= n_last; ++n) out.push_back({n, crossing_time(n, sigma), s_eff, p});
  return out;
}

double lz_probability(double s1, double s2, double sigma) {
  require_nonzero_sigma(sigma);
  const double s_sq = s1 * s2;
  if (s_sq < 0.0) {
    throw InvalidParameter("S1 * S2 < 0: outside the validity of the Landau-Zener formula");
  }
  return -std::expm1(-std::numbers::pi * s_sq / std::abs(sigma));
}

WaveState gauge_map(const WaveState& s, double alpha, GaugeDirection direction) {
  const double r = gauge_ratio(alpha);
  const double sign = direction == GaugeDirection::FromHermitian ? 0.5 : -0.5;
  Eigen::VectorXcd out(s.amps.size());
  for (Eigen::Index i = 0; i < s.amps.size(); ++i) {
    out[i] = s.amps[i] * std::pow(r, sign * s.window.mode(i));
  }
  return WaveState(s.tau, s.window, std::move(out), s.picture);
}

double asymmetry_residual(const Trajectory& plus, const Trajectory& minus, double alpha) {
  const double r = gauge_ratio(alpha);
  if (plus.size() == 0 || plus.size() != minus.size()) {
    throw InvalidParameter("trajectories differ in sample count");
  }
  if (plus.times != minus.times) throw InvalidParameter("trajectories differ in sample times");
  if (plus.window() != minus.window()) throw InvalidParameter("trajectories differ in window");
  const ModeWindow w = plus.window();
  if (w.n_min() != -w.n_max()) {
    throw InvalidParameter("asymmetry check needs a mirror-symmetric window [-N, N]");
  }

  double residual = 0.0;
  for (std::size_t k = 0; k < plus.size(); ++k) {
    for (int n = w.n_min(); n <= w.n_max(); ++n) {
      const Complex lhs = minus.states[k].amp(n);
      const Complex rhs = plus.states[k].amp(-n) * std::pow(r, n);
      if (std::abs(lhs) <= kModeFloor && std::abs(rhs) <= kModeFloor) continue;
      residual = std::max(residual, std::abs(lhs - rhs));
    }
  }
  return residual;
}

Complex asymptotic_jump(double s1, double sigma) {
  require_nonzero_sigma(sigma);
  return -kI * s1 * std::sqrt(Complex{std::numbers::pi} / (kI * sigma));
}

AmplitudeTable asymptotic_amplitudes(double v0, double sigma, const std::map<int, Complex>& initial,
                                     std::span<const double> taus, ModeWindow modes) {
  require_nonzero_sigma(sigma);
  const double s1 = 2.0 * v0;
  const Complex jump = asymptotic_jump(s1, sigma);
  auto init = [&](int n) {
    const auto it = initial.find(n);
    return it == initial.end() ? Complex{} : it->second;
  };
  // Mode n receives its jump at the crossing of n-1 and n.
  auto jump_time = [&](int n) { return crossing_time(n - 1, sigma); };
  auto receives = [&](int n) { return sigma > 0.0 ? n >= 1 : n <= 0; };

  for (const double tau : taus) {
    for (int n = modes.n_min(); n <= modes.n_max(); ++n) {
      if (!receives(n)) continue;
      const double tc = jump_time(n);
      if (std::abs(tau - tc) <= 1e-12 * std::max(1.0, std::abs(tc))) {
        std::ostringstream msg;
        msg << "tau = " << tau << " coincides with the crossing time of mode " << n;
        throw InvalidParameter(msg.str());
      }
    }
  }

  // Post-jump values; for sigma > 0 they chain upward from a_0.
  const int lo = std::min({modes.n_min(), 0, initial.empty() ? 0 : initial.begin()->first});
  std::map<int, Complex> after;
  for (int n = lo; n <= modes.n_max(); ++n) {
    if (!receives(n)) {
      after[n] = init(n);
      continue;
    }
    const double tc = jump_time(n);
    Complex feed;
    if (sigma > 0.0) {
      const auto it = after.find(n - 1);
      feed = it != after.end() ? it->second : init(n - 1);
    } else {
      feed = init(n - 1);
    }
    after[n] = init(n) + jump * std::polar(1.0, sigma * tc * tc) * feed;
  }

  AmplitudeTable table;
  table.n_first = modes.n_min();
  table.taus.assign(taus.begin(), taus.end());
  table.values.resize(modes.size(), static_cast<Eigen::Index>(taus.size()));
  for (std::size_t k = 0; k < taus.size(); ++k) {
    for (int n = modes.n_min(); n <= modes.n_max(); ++n) {
      const bool jumped = receives(n) && taus[k] > jump_time(n);
      table.values(modes.index(n), static_cast<Eigen::Index>(k)) = jumped ? after[n] : init(n);
    }
  }
  return table;
}

TransparencyPlan plan_transparency(int M, double sigma, double T_target) {
  if (!(sigma < 0.0) || !std::isfinite(sigma)) {
    throw InvalidParameter(
        "transparency needs sigma < 0: only the ramp direction that blocks the n -> n-1 "
        "transitions freezes the occupations");
  }
  if (!std::isfinite(T_target)) throw InvalidParameter("target delay must be finite");
  const double tau0 = T_target - crossing_time(M, sigma);
  return {M, sigma, tau0, crossing_time(M, sigma) + tau0};
}

std::pair<double, double> crossing_span(int n, double sigma, double margin_scale) {
  require_nonzero_sigma(sigma);
  const double tc = crossing_time(n, sigma);
  const double margin = margin_scale / std::sqrt(std::abs(sigma));
  return {tc - margin, tc + margin};
}

std::array<Complex, 2> two_level_lz(double s1, double s2, int n, double sigma,
                                    std::pair<double, double> tau_span, std::array<Complex, 2> initial,
                                    const PropagatorConfig& cfg) {
  require_nonzero_sigma(sigma);
  cfg.validate();
  const auto [a, b] = tau_span;
  const double tc = crossing_time(n, sigma);
  const double min_margin = 20.0 / std::sqrt(std::abs(sigma));
  if (!(tc - a >= min_margin && b - tc >= min_margin)) {
    std::ostringstream msg;
    msg << "tau span [" << a << ", " << b << "] must extend at least " << min_margin
        << " on both sides of the crossing at " << tc;
    throw InvalidParameter(msg.str());
  }

  // Half the level splitting, d = ((n+1 - sigma tau)^2 - (n - sigma tau)^2) / 2.
  auto rhs = [&](const detail::OdeState& c, detail::OdeState& dcdt, double tau) {
    const double d = 0.5 * (2.0 * n + 1.0 - 2.0 * sigma * tau);
    const Complex h0 = -d * c[0] + s2 * c[1];
    const Complex h1 = d * c[1] + s1 * c[0];
    dcdt[0] = -kI * h0;
    dcdt[1] = -kI * h1;
  };
  detail::OdeState x{initial[0], initial[1]};
  const double samples[] = {b};
  detail::integrate_samples(rhs, x, a, std::span<const double>(samples),
                            detail::StepControl{cfg.rtol, cfg.atol, cfg.max_step},
                            [](double, const detail::OdeState&) {},
                            [](std::size_t, const detail::OdeState&) {});

  // Mean energy (n^2 + (n+1)^2)/2 - (2n+1) sigma tau + sigma^2 tau^2, integrated over [a, b].
  const double base = 0.5 * (static_cast<double>(n) * n + static_cast<double>(n + 1) * (n + 1));
  const double phase = base * (b - a) - (2.0 * n + 1.0) * sigma * (b * b - a * a) / 2.0 +
                       sigma * sigma * (b * b * b - a * a * a) / 3.0;
  const Complex rot = std::polar(1.0, -phase);
  return {x[0] * rot, x[1] * rot};
}

void write_crossings_csv(std::ostream& os, const std::vector<LZEvent>& events) {
  os << "n,tau_n,p_zener\n";
  for (const auto& e : events) csv::row(os, e.n, e.tau_n, e.p_zener);
}

}  // namespace nhring
