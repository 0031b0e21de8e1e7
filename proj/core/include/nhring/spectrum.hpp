#pragma once

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "nhring/ring_model.hpp"

namespace nhring {

// H[n,m] = (n - f)^2 delta_{nm} + u_{n-m}, rows/columns in ascending n.
struct HamiltonianMatrix {
  ModeWindow window;
  double f;
  Eigen::MatrixXcd entries;
};

HamiltonianMatrix build_hamiltonian(const RingPotential& p, double f, ModeWindow window);

// Eigenpairs sorted by ascending real part, ties by ascending imaginary part.
// Eigenvectors are unit-norm columns.
struct EigenSolution {
  Eigen::VectorXcd eigenvalues;
  Eigen::MatrixXcd eigenvectors;
  Eigen::VectorXd residuals;  // ||H v - lambda v||
};

inline constexpr double kDefaultEigenTol = 1e-10;

// Dense non-Hermitian eigensolver. Triangular input is already in Schur form
// and skips the QR sweep, so its eigenvalues are the diagonal exactly.
// Throws SolverFailure if QR does not converge or a residual exceeds
// tol * ||H||_F.
EigenSolution eigensolve(const Eigen::MatrixXcd& h, double tol = kDefaultEigenTol);
EigenSolution eigensolve(const HamiltonianMatrix& h, double tol = kDefaultEigenTol);

// Largest change of the lowest n_bands eigenvalues (by real part) when the
// window is doubled around its center.
double window_drift(const RingPotential& p, double f, ModeWindow window, int n_bands = 8);

struct TrackingFlag {
  enum class Reason { Jump, NearDegenerate };
  std::size_t sample;
  int band;
  Reason reason;
};

struct BandStructure {
  std::vector<double> f_grid;                // f_k = -1/2 + k / n_f
  std::vector<std::vector<Complex>> bands;   // bands[b][k]
  double max_im = 0.0;
  std::vector<TrackingFlag> flags;
};

// Sweeps f over [-1/2, 1/2) and follows each band by continuation in the
// complex plane. Continuation ambiguities are reported in flags, not thrown.
BandStructure band_sweep(const RingPotential& p, ModeWindow window, int n_f);

// Bisection on alpha for the reference family against
// max |Im E| <= im_tol. Throws BracketInvalid if the predicate does not flip
// across alpha_range.
double estimate_alpha_c(double v0, std::pair<double, double> alpha_range, double im_tol,
                        ModeWindow window, int n_f, double width_tol = 1e-3);

struct EPReport {
  double f_star;
  std::pair<int, int> pair;  // indices into the sorted spectrum at f_star
  double gap;
  double coalescence_metric;  // 1 - |<v_i, v_j>|
};

struct EPSearchOptions {
  int n_scan = 201;
  double f_tol = 1e-10;
};

std::vector<EPReport> locate_exceptional_points(const RingPotential& p, ModeWindow window,
                                                std::pair<double, double> f_search,
                                                double gap_tol, double vec_tol,
                                                const EPSearchOptions& opts = {});

// Columns: f, band, re_E, im_E
void write_bands_csv(std::ostream& os, const BandStructure& bands);
// Columns: f_star, band_i, band_j, gap, coalescence_metric
void write_ep_csv(std::ostream& os, const std::vector<EPReport>& eps);

}  // namespace nhring
