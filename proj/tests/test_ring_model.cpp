#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "nhring/errors.hpp"
#include "nhring/ring_model.hpp"

namespace nhring {
namespace {

TEST(ReferencePotential, HermitianCoefficients) {
  const auto p = make_reference_potential(0.08, 0.0);
  EXPECT_DOUBLE_EQ(p.coeff(1).real(), 0.08);
  EXPECT_DOUBLE_EQ(p.coeff(-1).real(), 0.08);
  EXPECT_EQ(p.coeffs().size(), 2u);
  ASSERT_TRUE(p.descriptor().has_value());
  EXPECT_DOUBLE_EQ(p.descriptor()->v0, 0.08);
}

TEST(ReferencePotential, BreakingPointKeepsOneHarmonic) {
  const auto p = make_reference_potential(0.02, 1.0);
  EXPECT_DOUBLE_EQ(p.coeff(1).real(), 0.04);
  EXPECT_EQ(p.coeff(-1), Complex{});
  EXPECT_EQ(p.coeffs().count(-1), 0u);
}

TEST(ReferencePotential, ZeroStrengthIsEmpty) {
  EXPECT_TRUE(make_reference_potential(0.0, 0.5).empty());
}

TEST(ReferencePotential, RejectsBadInput) {
  EXPECT_THROW(make_reference_potential(-0.1, 0.0), InvalidParameter);
  EXPECT_THROW(make_reference_potential(0.1, -0.2), InvalidParameter);
  EXPECT_THROW(make_reference_potential(NAN, 0.2), InvalidParameter);
  EXPECT_THROW(make_reference_potential(0.1, INFINITY), InvalidParameter);
}

TEST(RingPotential, FromCoeffsDropsZerosAndRejectsNonFinite) {
  const auto p = RingPotential::from_coeffs({{1, {0.1, 0.0}}, {2, {}}, {-3, {0.0, 0.2}}});
  EXPECT_EQ(p.coeffs().size(), 2u);
  EXPECT_FALSE(p.descriptor().has_value());
  EXPECT_THROW(RingPotential::from_coeffs({{1, {NAN, 0.0}}}), InvalidParameter);
}

TEST(FreeEnergy, Values) {
  EXPECT_DOUBLE_EQ(free_energy(2, 0.5), 2.25);
  EXPECT_DOUBLE_EQ(free_energy(0, 0.0), 0.0);
  for (int l = -5; l <= 5; ++l) {
    const double f = (2.0 * l + 1.0) / 2.0;
    EXPECT_DOUBLE_EQ(free_energy(l + 1, f) - free_energy(l, f), 0.0) << "l=" << l;
  }
}

TEST(FreeEnergy, MirrorSymmetryProperty) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> n_dist(-50, 50);
  std::uniform_real_distribution<double> f_dist(-10.0, 10.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = n_dist(rng);
    const double f = f_dist(rng);
    ASSERT_EQ(free_energy(n, f), free_energy(-n, -f)) << "n=" << n << " f=" << f;
  }
}

TEST(PtSymmetry, Examples) {
  EXPECT_TRUE(is_pt_symmetric(make_reference_potential(0.08, 0.3), 0.0));
  EXPECT_FALSE(is_pt_symmetric(RingPotential::from_coeffs({{1, {0.0, 0.1}}}), 1e-12));
  EXPECT_TRUE(is_pt_symmetric(RingPotential{}, 0.0));
  EXPECT_THROW(is_pt_symmetric(RingPotential{}, -1.0), InvalidParameter);
}

TEST(PtSymmetry, ReferenceFamilyProperty) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> v0(0.0, 1.0);
  std::uniform_real_distribution<double> alpha(0.0, 3.0);
  for (int trial = 0; trial < 500; ++trial) {
    ASSERT_TRUE(is_pt_symmetric(make_reference_potential(v0(rng), alpha(rng)), 0.0));
  }
}

TEST(SamplePotential, Examples) {
  const auto p = make_reference_potential(0.02, 1.0);
  const double phis[] = {0.0, std::numbers::pi};
  const auto v = sample_potential(p, phis);
  EXPECT_NEAR(std::abs(v[0] - Complex(0.04, 0.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(v[1] - Complex(-0.04, 0.0)), 0.0, 1e-15);
  for (const auto z : sample_potential(RingPotential{}, phis)) EXPECT_EQ(z, Complex{});
}

TEST(SamplePotential, MatchesTrigonometricFormProperty) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> v0_dist(0.0, 0.5);
  std::uniform_real_distribution<double> alpha_dist(0.0, 2.0);
  std::uniform_real_distribution<double> phi_dist(-10.0, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double v0 = v0_dist(rng);
    const double alpha = alpha_dist(rng);
    std::vector<double> phis(32);
    for (auto& x : phis) x = phi_dist(rng);
    const auto v = sample_potential(make_reference_potential(v0, alpha), phis);
    for (std::size_t k = 0; k < phis.size(); ++k) {
      const Complex direct(2.0 * v0 * std::cos(phis[k]), 2.0 * alpha * v0 * std::sin(phis[k]));
      ASSERT_LE(std::abs(v[k] - direct), 1e-12) << "v0=" << v0 << " alpha=" << alpha;
    }
  }
}

TEST(FluxProgram, RampAndStatic) {
  const auto ramp = FluxProgram::ramp(0.003, -966.0);
  EXPECT_DOUBLE_EQ(ramp.at(34.0), 0.003 * 1000.0);
  EXPECT_TRUE(ramp.is_ramp());
  const auto flat = FluxProgram::constant(0.5);
  EXPECT_DOUBLE_EQ(flat.at(123.0), 0.5);
  EXPECT_FALSE(flat.is_ramp());
  EXPECT_THROW(FluxProgram::ramp(0.0), InvalidParameter);
}

TEST(FluxProgram, PhaseIntegralMatchesQuadrature) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> sigma_dist(-0.01, 0.01);
  std::uniform_real_distribution<double> tau0_dist(-500.0, 500.0);
  std::uniform_real_distribution<double> tau_dist(0.0, 300.0);
  std::uniform_int_distribution<int> n_dist(-8, 8);
  for (int trial = 0; trial < 50; ++trial) {
    const double sigma = sigma_dist(rng);
    if (sigma == 0.0) continue;
    const auto flux = FluxProgram::ramp(sigma, tau0_dist(rng));
    const int n = n_dist(rng);
    const double tau = tau_dist(rng);
    // Simpson is exact for the quadratic integrand.
    const double mid = free_energy(n, flux.at(0.5 * tau));
    const double simpson = tau / 6.0 * (free_energy(n, flux.at(0.0)) + 4.0 * mid + free_energy(n, flux.at(tau)));
    ASSERT_NEAR(flux.phase_integral(n, tau), simpson, 1e-9 * std::max(1.0, std::abs(simpson)));
  }
  EXPECT_DOUBLE_EQ(FluxProgram::constant(0.25).phase_integral(2, 3.0), 1.75 * 1.75 * 3.0);
}

TEST(ModeWindow, BasicsAndValidation) {
  const ModeWindow w(-4, 6);
  EXPECT_EQ(w.size(), 11);
  EXPECT_TRUE(w.contains(-4));
  EXPECT_FALSE(w.contains(7));
  EXPECT_EQ(w.index(0), 4);
  EXPECT_EQ(w.mode(4), 0);
  EXPECT_THROW(ModeWindow(0, 1), InvalidParameter);
  EXPECT_THROW(ModeWindow(3, -3), InvalidParameter);
}

TEST(WaveState, DeltaAndWindowing) {
  const auto s = WaveState::delta(ModeWindow(-3, 3), 1, 2.5);
  EXPECT_EQ(s.amp(1), Complex(1.0));
  EXPECT_EQ(s.amp(9), Complex{});
  EXPECT_DOUBLE_EQ(s.norm2(), 1.0);
  EXPECT_DOUBLE_EQ(s.mean_winding(), 1.0);
  EXPECT_DOUBLE_EQ(s.tau, 2.5);

  const auto wide = s.on_window(ModeWindow(-10, 10));
  EXPECT_EQ(wide.amp(1), Complex(1.0));
  EXPECT_EQ(wide.amps.size(), 21);
  const auto cut = s.on_window(ModeWindow(2, 6));
  EXPECT_DOUBLE_EQ(cut.norm2(), 0.0);

  EXPECT_THROW(WaveState::delta(ModeWindow(-3, 3), 5), InvalidParameter);
  EXPECT_THROW(WaveState(0.0, ModeWindow(-1, 1), Eigen::VectorXcd::Zero(4)), InvalidParameter);
}

}  // namespace
}  // namespace nhring
