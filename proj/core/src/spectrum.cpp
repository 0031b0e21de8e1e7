#include "nhring/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "nhring/csv.hpp"
#include "nhring/errors.hpp"
#include "nhring/golden_section.hpp"

namespace nhring {
namespace {

bool ascending_re_then_im(const Complex& a, const Complex& b) {
  const double scale = std::max({1.0, std::abs(a.real()), std::abs(b.real())});
  if (std::abs(a.real() - b.real()) > 1e-9 * scale) return a.real() < b.real();
  return a.imag() < b.imag();
}

bool strictly_lower_is_zero(const Eigen::MatrixXcd& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = j + 1; i < m.rows(); ++i)
      if (m(i, j) != Complex{}) return false;
  return true;
}

bool strictly_upper_is_zero(const Eigen::MatrixXcd& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < j; ++i)
      if (m(i, j) != Complex{}) return false;
  return true;
}

// Eigenvectors of an upper-triangular T by back-substitution. Exactly
// repeated diagonal entries get an eps-sized divisor, which makes the two
// vectors of a defective pair (numerically) parallel.
Eigen::MatrixXcd triangular_eigenvectors(const Eigen::MatrixXcd& t) {
  const Eigen::Index n = t.rows();
  const double eps_norm = std::numeric_limits<double>::epsilon() * std::max(t.norm(), 1e-300);
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    x(k, k) = 1.0;
    for (Eigen::Index i = k - 1; i >= 0; --i) {
      Complex acc = -t(i, k);
      for (Eigen::Index j = i + 1; j < k; ++j) acc -= t(i, j) * x(j, k);
      Complex z = t(i, i) - t(k, k);
      if (z == Complex{}) z = eps_norm;
      x(i, k) = acc / z;
    }
    // Rescale to keep later columns' back-substitution away from overflow.
    const double m = x.col(k).cwiseAbs().maxCoeff();
    if (m > 0.0) x.col(k) /= m;
  }
  return x;
}

double min_pair_gap(const Eigen::VectorXcd& ev) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    for (Eigen::Index j = i + 1; j < ev.size(); ++j) best = std::min(best, std::abs(ev[i] - ev[j]));
  return best;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

HamiltonianMatrix build_hamiltonian(const RingPotential& p, double f, ModeWindow window) {
  const Eigen::Index dim = window.size();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const int n = window.mode(i);
    h(i, i) = free_energy(n, f);
    for (const auto& [q, u] : p.coeffs()) {
      const int m = n - q;
      if (window.contains(m)) h(i, window.index(m)) += u;
    }
  }
  return {window, f, std::move(h)};
}

EigenSolution eigensolve(const Eigen::MatrixXcd& h, double tol) {
  if (h.rows() != h.cols()) throw InvalidParameter("eigensolve needs a square matrix");
  if (!h.allFinite()) throw InvalidParameter("eigensolve input has non-finite entries");
  const Eigen::Index n = h.rows();

  Eigen::MatrixXcd t;
  Eigen::MatrixXcd z;
  if (strictly_lower_is_zero(h)) {
    t = h;
    z = Eigen::MatrixXcd::Identity(n, n);
  } else if (strictly_upper_is_zero(h)) {
    // Reversing the basis order turns lower- into upper-triangular.
    t = h.reverse();
    z = Eigen::MatrixXcd::Identity(n, n).rowwise().reverse();
  } else {
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(h);
    if (schur.info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "complex Schur iteration did not converge (n = " << n << ", ||H||_F = " << h.norm()
          << ")";
      throw SolverFailure(msg.str());
    }
    t = schur.matrixT();
    z = schur.matrixU();
  }

  Eigen::MatrixXcd vecs = z * triangular_eigenvectors(t);
  vecs.colwise().normalize();
  Eigen::VectorXcd vals = t.diagonal();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return ascending_re_then_im(vals[a], vals[b]);
  });

  EigenSolution out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  out.residuals.resize(n);
  const double h_norm = h.norm();
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.eigenvalues[k] = vals[src];
    out.eigenvectors.col(k) = vecs.col(src);
    out.residuals[k] = (h * vecs.col(src) - vals[src] * vecs.col(src)).norm();
    if (out.residuals[k] > tol * h_norm) {
      std::ostringstream msg;
      msg << "eigenpair " << k << " (lambda = " << vals[src] << ") has residual "
          << out.residuals[k] << " > " << tol << " * ||H||_F = " << tol * h_norm;
      throw SolverFailure(msg.str());
    }
  }
  return out;
}

EigenSolution eigensolve(const HamiltonianMatrix& h, double tol) { return eigensolve(h.entries, tol); }

double window_drift(const RingPotential& p, double f, ModeWindow window, int n_bands) {
  const int half = window.size();
  const int center = (window.n_min() + window.n_max()) / 2;
  const ModeWindow doubled(center - half, center + half);
  const auto a = eigensolve(build_hamiltonian(p, f, window)).eigenvalues;
  const auto b = eigensolve(build_hamiltonian(p, f, doubled)).eigenvalues;
  const Eigen::Index count = std::min<Eigen::Index>(n_bands, a.size());
  double drift = 0.0;
  for (Eigen::Index k = 0; k < count; ++k) drift = std::max(drift, std::abs(a[k] - b[k]));
  return drift;
}

BandStructure band_sweep(const RingPotential& p, ModeWindow window, int n_f) {
  if (n_f < 8) throw InvalidParameter("band_sweep needs n_f >= 8");
  const auto nf = static_cast<std::size_t>(n_f);
  const auto nb = static_cast<std::size_t>(window.size());

  BandStructure out;
  out.f_grid.resize(nf);
  for (std::size_t k = 0; k < nf; ++k) out.f_grid[k] = -0.5 + static_cast<double>(k) / n_f;

  std::vector<Eigen::VectorXcd> spectra(nf);
  std::vector<std::exception_ptr> errors(nf);
#pragma omp parallel for schedule(static)
  for (int k = 0; k < n_f; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    try {
      spectra[ks] = eigensolve(build_hamiltonian(p, out.f_grid[ks], window)).eigenvalues;
    } catch (...) {
      errors[ks] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  out.bands.assign(nb, std::vector<Complex>(nf));
  for (std::size_t b = 0; b < nb; ++b) out.bands[b][0] = spectra[0][static_cast<Eigen::Index>(b)];

  // Greedy continuation: match the linearly extrapolated band positions to the
  // new eigenvalues, closest pairs first.
  struct Candidate {
    double dist;
    std::size_t band;
    std::size_t eig;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(nb * nb);
  for (std::size_t k = 1; k < nf; ++k) {
    candidates.clear();
    for (std::size_t b = 0; b < nb; ++b) {
      Complex predicted = out.bands[b][k - 1];
      if (k >= 2) predicted += out.bands[b][k - 1] - out.bands[b][k - 2];
      for (std::size_t j = 0; j < nb; ++j) {
        candidates.push_back({std::abs(predicted - spectra[k][static_cast<Eigen::Index>(j)]), b, j});
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& c) { return a.dist < c.dist; });
    std::vector<bool> band_done(nb, false);
    std::vector<bool> eig_used(nb, false);
    for (const auto& c : candidates) {
      if (band_done[c.band] || eig_used[c.eig]) continue;
      band_done[c.band] = true;
      eig_used[c.eig] = true;
      out.bands[c.band][k] = spectra[k][static_cast<Eigen::Index>(c.eig)];
    }
  }

  std::vector<double> steps;
  steps.reserve(nb * nf);
  for (const auto& band : out.bands)
    for (std::size_t k = 1; k < nf; ++k) steps.push_back(std::abs(band[k] - band[k - 1]));
  const double typical_step = median(steps);
  const double jump_threshold = 10.0 * typical_step;

  for (std::size_t b = 0; b < nb; ++b) {
    for (std::size_t k = 0; k < nf; ++k) {
      const Complex e = out.bands[b][k];
      out.max_im = std::max(out.max_im, std::abs(e.imag()));
      if (k > 0 && typical_step > 0.0 && std::abs(e - out.bands[b][k - 1]) > jump_threshold) {
        out.flags.push_back({k, static_cast<int>(b), TrackingFlag::Reason::Jump});
      }
      for (std::size_t o = 0; o < nb; ++o) {
        if (o != b && std::abs(e - out.bands[o][k]) < typical_step) {
          out.flags.push_back({k, static_cast<int>(b), TrackingFlag::Reason::NearDegenerate});
          break;
        }
      }
    }
  }
  return out;
}

double estimate_alpha_c(double v0, std::pair<double, double> alpha_range, double im_tol,
                        ModeWindow window, int n_f, double width_tol) {
  auto [lo, hi] = alpha_range;
  if (!(lo < hi) || lo < 0.0) throw InvalidParameter("alpha_range must satisfy 0 <= lo < hi");
  if (!(width_tol > 0.0)) throw InvalidParameter("width_tol must be positive");
  auto real_spectrum = [&](double alpha) {
    return band_sweep(make_reference_potential(v0, alpha), window, n_f).max_im <= im_tol;
  };
  if (!real_spectrum(lo) || real_spectrum(hi)) {
    std::ostringstream msg;
    msg << "alpha range [" << lo << ", " << hi
        << "] does not bracket the PT transition (need real spectrum at the low end and complex"
           " at the high end)";
    throw BracketInvalid(msg.str());
  }
  while (hi - lo > width_tol) {
    const double mid = 0.5 * (lo + hi);
    (real_spectrum(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<EPReport> locate_exceptional_points(const RingPotential& p, ModeWindow window,
                                                std::pair<double, double> f_search,
                                                double gap_tol, double vec_tol,
                                                const EPSearchOptions& opts) {
  const auto [a, b] = f_search;
  if (!(a < b)) throw InvalidParameter("f_search must satisfy lo < hi");
  if (opts.n_scan < 3) throw InvalidParameter("EP scan needs at least 3 samples");

  auto gap_at = [&](double f) { return min_pair_gap(eigensolve(build_hamiltonian(p, f, window)).eigenvalues); };

  const int ns = opts.n_scan;
  std::vector<double> fs(static_cast<std::size_t>(ns));
  std::vector<double> gs(static_cast<std::size_t>(ns));
  for (int k = 0; k < ns; ++k) {
    fs[static_cast<std::size_t>(k)] = a + (b - a) * k / (ns - 1);
    gs[static_cast<std::size_t>(k)] = gap_at(fs[static_cast<std::size_t>(k)]);
  }

  std::vector<EPReport> out;
  for (int k = 0; k < ns; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const bool left_ok = k == 0 || gs[ks] <= gs[ks - 1];
    const bool right_ok = k == ns - 1 || gs[ks] <= gs[ks + 1];
    if (!left_ok || !right_ok) continue;

    const double lo = fs[k == 0 ? ks : ks - 1];
    const double hi = fs[k == ns - 1 ? ks : ks + 1];
    ScalarMinimum best{fs[ks], gs[ks], 0};
    const auto refined = golden_section_minimize(gap_at, lo, hi, opts.f_tol);
    if (refined.value < best.value) best = refined;
    if (best.value > gap_tol) continue;

    const bool duplicate = std::any_of(out.begin(), out.end(), [&](const EPReport& r) {
      return std::abs(r.f_star - best.x) < 1e-6;
    });
    if (duplicate) continue;

    const auto sol = eigensolve(build_hamiltonian(p, best.x, window));
    const Eigen::Index n = sol.eigenvalues.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double gap = std::abs(sol.eigenvalues[i] - sol.eigenvalues[j]);
        if (gap > gap_tol) continue;
        const double overlap = std::abs(sol.eigenvectors.col(i).dot(sol.eigenvectors.col(j)));
        const double metric = std::max(0.0, 1.0 - overlap);
        if (metric <= vec_tol) {
          out.push_back({best.x, {static_cast<int>(i), static_cast<int>(j)}, gap, metric});
        }
      }
    }
  }
  return out;
}

void write_bands_csv(std::ostream& os, const BandStructure& bands) {
  os << "f,band,re_E,im_E\n";
  for (std::size_t k = 0; k < bands.f_grid.size(); ++k)
    for (std::size_t b = 0; b < bands.bands.size(); ++b)
      csv::row(os, bands.f_grid[k], static_cast<int>(b), bands.bands[b][k].real(),
               bands.bands[b][k].imag());
}

void write_ep_csv(std::ostream& os, const std::vector<EPReport>& eps) {
  os << "f_star,band_i,band_j,gap,coalescence_metric\n";
  for (const auto& e : eps)
    csv::row(os, e.f_star, e.pair.first, e.pair.second, e.gap, e.coalescence_metric);
}

}  // namespace nhring
