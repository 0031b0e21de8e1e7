#pragma once

// Reference computations used only by the tests. None of them call into the
// library's numerics, so agreement is an independent check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace nhring::testing {

using Cplx = std::complex<double>;

// Monic characteristic polynomial det(zI - A) by Faddeev-LeVerrier.
// Returns c with c[k] the coefficient of z^k, c[n] = 1.
inline std::vector<Cplx> char_poly(const Eigen::MatrixXcd& a) {
  const auto n = a.rows();
  std::vector<Cplx> c(static_cast<std::size_t>(n) + 1);
  c[static_cast<std::size_t>(n)] = 1.0;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    m = a * m + c[static_cast<std::size_t>(n - k + 1)] * id;
    c[static_cast<std::size_t>(n - k)] = -(a * m).trace() / static_cast<double>(k);
  }
  return c;
}

inline Cplx poly_eval(const std::vector<Cplx>& c, Cplx z) {
  Cplx acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
  return acc;
}

// Durand-Kerner simultaneous iteration followed by a few Newton polishes.
inline std::vector<Cplx> poly_roots(const std::vector<Cplx>& c) {
  const std::size_t n = c.size() - 1;
  double radius = 0.0;
  for (std::size_t k = 0; k < n; ++k) radius = std::max(radius, std::abs(c[k]));
  radius = 1.0 + radius;
  std::vector<Cplx> z(n);
  const Cplx seed(0.4, 0.9);
  for (std::size_t k = 0; k < n; ++k) z[k] = radius * std::pow(seed, static_cast<double>(k));

  for (int it = 0; it < 2000; ++it) {
    double moved = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Cplx denom = 1.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) denom *= z[i] - z[j];
      }
      const Cplx step = poly_eval(c, z[i]) / denom;
      z[i] -= step;
      moved = std::max(moved, std::abs(step));
    }
    if (moved < 1e-15 * radius) break;
  }

  std::vector<Cplx> dc(n);
  for (std::size_t k = 1; k <= n; ++k) dc[k - 1] = static_cast<double>(k) * c[k];
  for (auto& r : z) {
    for (int it = 0; it < 3; ++it) {
      const Cplx d = poly_eval(dc, r);
      if (std::abs(d) == 0.0) break;
      r -= poly_eval(c, r) / d;
    }
  }
  return z;
}

// Smallest max-distance over all pairings of two equally long root lists.
inline double match_distance(std::vector<Cplx> a, const std::vector<Cplx>& b) {
  std::vector<std::size_t> perm(b.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  double best = std::numeric_limits<double>::infinity();
  do {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[perm[i]]));
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline Eigen::MatrixXcd random_matrix(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = Cplx(u(rng), u(rng));
  }
  return m;
}

// Trapezoid rule on [0, 2 pi) for a periodic integrand sampled uniformly.
inline double periodic_trapezoid(const std::vector<double>& samples) {
  double s = 0.0;
  for (const double v : samples) s += v;
  return s * 2.0 * std::numbers::pi / static_cast<double>(samples.size());
}

// Composite Simpson for a complex integrand on [a, b] with `intervals` (even).
template <class Fn>
Cplx simpson(Fn&& fn, double a, double b, int intervals) {
  const double h = (b - a) / intervals;
  Cplx s = fn(a) + fn(b);
  for (int k = 1; k < intervals; ++k) s += (k % 2 == 1 ? 4.0 : 2.0) * fn(a + k * h);
  return s * h / 3.0;
}

// Interaction-picture amplitudes a_n for a nearest-neighbour potential
// (u_{+1}, u_{-1}) under f = sigma (tau - tau0), integrated with classical
// RK4 at a fixed step. Phases use the cubic antiderivative directly.
struct InteractionRk4 {
  int n_min;
  int n_max;
  Cplx u_plus;
  Cplx u_minus;
  double sigma;
  double tau0;

  double phase(int n, double tau) const {
    if (sigma == 0.0) {
      const double d = n + 0.0;
      return d * d * tau;
    }
    const double b = n + sigma * tau0;
    const double e = b - sigma * tau;
    return (b * b * b - e * e * e) / (3.0 * sigma);
  }

  void rhs(double tau, const std::vector<Cplx>& a, std::vector<Cplx>& out) const {
    const Cplx minus_i(0.0, -1.0);
    const std::size_t m = a.size();
    for (std::size_t i = 0; i < m; ++i) {
      const int n = n_min + static_cast<int>(i);
      Cplx acc = 0.0;
      if (i >= 1) acc += u_plus * std::polar(1.0, phase(n, tau) - phase(n - 1, tau)) * a[i - 1];
      if (i + 1 < m) acc += u_minus * std::polar(1.0, phase(n, tau) - phase(n + 1, tau)) * a[i + 1];
      out[i] = minus_i * acc;
    }
  }

  std::vector<Cplx> run(std::vector<Cplx> a, double t0, double t1, double h) const {
    const int steps = static_cast<int>(std::ceil((t1 - t0) / h));
    const double dt = (t1 - t0) / steps;
    const std::size_t m = a.size();
    std::vector<Cplx> k1(m), k2(m), k3(m), k4(m), tmp(m);
    double t = t0;
    for (int s = 0; s < steps; ++s) {
      rhs(t, a, k1);
      for (std::size_t i = 0; i < m; ++i) tmp[i] = a[i] + 0.5 * dt * k1[i];
      rhs(t + 0.5 * dt, tmp, k2);
      for (std::size_t i = 0; i < m; ++i) tmp[i] = a[i] + 0.5 * dt * k2[i];
      rhs(t + 0.5 * dt, tmp, k3);
      for (std::size_t i = 0; i < m; ++i) tmp[i] = a[i] + dt * k3[i];
      rhs(t + dt, tmp, k4);
      for (std::size_t i = 0; i < m; ++i) a[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      t = t0 + (s + 1) * dt;
    }
    return a;
  }
};

// Exact first-order amplitude of mode 1 for u_{+1} = s1 alone, f = sigma tau
// and c_n(0) = delta_{n,0}: a_1(tau) = -i s1 int_0^tau exp(i (xi - sigma xi^2)) dxi.
inline Cplx first_mode_amplitude(double s1, double sigma, double tau) {
  const int intervals = 2 * std::max(100, static_cast<int>(std::ceil(tau * (1.0 + 2.0 * std::abs(sigma) * tau) * 20.0)));
  const Cplx integral = simpson([&](double x) { return std::polar(1.0, x - sigma * x * x); }, 0.0, tau, intervals);
  return Cplx(0.0, -s1) * integral;
}

// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace nhring::testing
