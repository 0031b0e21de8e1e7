#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "nhring/dynamics.hpp"
#include "nhring/errors.hpp"
#include "support/oracles.hpp"

namespace nhring {
namespace {

using testing::Cplx;

WaveState random_state(std::mt19937_64& rng, ModeWindow w, int support_lo, int support_hi) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(w.size());
  for (int n = support_lo; n <= support_hi; ++n) a[w.index(n)] = Complex(g(rng), g(rng));
  a /= a.norm();
  return WaveState(0.0, w, a);
}

PropagatorConfig tight() {
  PropagatorConfig cfg;
  cfg.rtol = 1e-12;
  cfg.atol = 1e-15;
  return cfg;
}

TEST(Evolve, ZeroPotentialKeepsModuli) {
  std::mt19937_64 rng(31);
  const ModeWindow w(-8, 8);
  const auto init = random_state(rng, w, -3, 3);
  for (const auto& flux : {FluxProgram::ramp(0.01), FluxProgram::constant(0.3)}) {
    const auto traj = evolve(RingPotential{}, flux, w, init, {0.0, 400.0}, tight(), 20);
    for (const auto& s : traj.states) {
      ASSERT_LE((s.amps.cwiseAbs() - init.amps.cwiseAbs()).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(Evolve, ZeroPotentialMatchesDynamicalPhase) {
  const ModeWindow w(-4, 4);
  const auto flux = FluxProgram::ramp(0.003, 20.0);
  std::mt19937_64 rng(32);
  const auto init = random_state(rng, w, -2, 2);
  const auto traj = evolve(RingPotential{}, flux, w, init, {0.0, 300.0}, tight(), 4);
  const auto& last = traj.states.back();
  for (int n = -2; n <= 2; ++n) {
    const Complex expected = init.amp(n) * std::polar(1.0, -flux.phase_integral(n, 300.0));
    EXPECT_LE(std::abs(last.amp(n) - expected), 1e-9);
  }
}

TEST(Evolve, HermitianNormConservationProperty) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> v_dist(0.02, 0.1);
  std::uniform_real_distribution<double> s_dist(0.001, 0.004);
  for (int trial = 0; trial < 3; ++trial) {
    const double sigma = (trial % 2 == 0 ? 1.0 : -1.0) * s_dist(rng);
    const auto flux = FluxProgram::ramp(sigma);
    const std::pair<double, double> span{0.0, 2000.0};
    const auto wide = WaveState::delta(ModeWindow(-3, 3), 0);
    const ModeWindow w = auto_window(wide, flux, span);
    const auto traj = evolve(make_reference_potential(v_dist(rng), 0.0), flux, w, wide.on_window(w), span, {}, 60);
    for (const double n : traj.norms) ASSERT_NEAR(n, 1.0, 1e-7) << "sigma=" << sigma;
  }
}

TEST(Evolve, HermitianDriftFollowsCrossings) {
  const double sigma = 0.003;
  const ModeWindow w(-4, 12);
  std::vector<double> times{0.0};
  for (int k = 0; k < 5; ++k) times.push_back(static_cast<double>(k + 1) / sigma);  // between crossings k and k+1
  const auto traj = evolve(make_reference_potential(0.08, 0.0), FluxProgram::ramp(sigma), w,
                           WaveState::delta(w, 0), std::span<const double>(times));
  for (std::size_t k = 0; k < times.size(); ++k) {
    EXPECT_NEAR(traj.mean_winding[k], static_cast<double>(k), 0.1) << "tau=" << times[k];
    EXPECT_NEAR(traj.norms[k], 1.0, 1e-7);
  }
}

TEST(Evolve, MatchesTriangularOracleProperty) {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> f_dist(-1.0, 1.0);
  std::uniform_real_distribution<double> v_dist(0.005, 0.03);
  for (int trial = 0; trial < 6; ++trial) {
    const double f = trial == 0 ? 0.5 : f_dist(rng);
    const double v0 = v_dist(rng);
    const ModeWindow w(-3, 12);
    const auto flux = FluxProgram::constant(f);
    const auto traj = evolve(make_reference_potential(v0, 1.0), flux, w, WaveState::delta(w, 0), {0.0, 200.0}, tight(), 21);
    const auto table = triangular_oracle(v0, f, 0, traj.times, 4);
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const auto a = to_interaction_picture(traj.states[k], flux);
      for (int n = 0; n <= 4; ++n) {
        const Complex ref = table.at(n, k);
        if (std::abs(ref) < 1e-7) continue;
        ASSERT_LE(std::abs(a.amp(n) - ref) / std::abs(ref), 1e-6) << "f=" << f << " n=" << n << " tau=" << traj.times[k];
      }
      for (int n = -3; n < 0; ++n) ASSERT_EQ(a.amp(n), Complex{});
    }
  }
}

TEST(TriangularOracle, Examples) {
  const double v0 = 0.02;
  const double s1 = 0.04;
  const std::vector<double> taus{0.0, 1.0, 7.3, 50.0};
  const auto half = triangular_oracle(v0, 0.5, 0, taus, 3);
  const auto zero = triangular_oracle(v0, 0.0, 0, taus, 3);
  for (std::size_t k = 0; k < taus.size(); ++k) {
    EXPECT_LE(std::abs(half.at(1, k) - Complex(0.0, -s1 * taus[k])), 1e-14);
    EXPECT_NEAR(std::abs(zero.at(1, k)), s1 * std::abs(2.0 * std::sin(taus[k] / 2.0)), 1e-14);
    EXPECT_EQ(half.at(0, k), Complex(1.0));
  }
  for (int n = 1; n <= 3; ++n) EXPECT_EQ(half.at(n, 0), Complex{});
  EXPECT_THROW(triangular_oracle(v0, 0.0, 2, taus, 1), InvalidParameter);
}

TEST(TriangularOracle, AgreesWithQuadratureOnSecondMode) {
  // c_2 = -i S1 int_0^tau c_1(xi) exp(i (3 - 2f) xi) dxi, with c_1 from the first example.
  const double v0 = 0.02;
  const double s1 = 0.04;
  const double f = 0.3;
  const std::vector<double> taus{12.0};
  const auto table = triangular_oracle(v0, f, 0, taus, 2);
  const auto c1 = [&](double x) { return Cplx(0.0, -s1) * (std::polar(1.0, (1.0 - 2.0 * f) * x) - 1.0) / Cplx(0.0, 1.0 - 2.0 * f); };
  const Cplx quad = Cplx(0.0, -s1) * testing::simpson([&](double x) { return c1(x) * std::polar(1.0, (3.0 - 2.0 * f) * x); }, 0.0, 12.0, 4000);
  EXPECT_LE(std::abs(table.at(2, 0) - quad), 1e-12);
}

TEST(Evolve, SecularGrowthAtHalfFlux) {
  const double v0 = 0.02;
  const double s1 = 2.0 * v0;
  const ModeWindow w(-3, 10);
  const auto traj = evolve(make_reference_potential(v0, 1.0), FluxProgram::constant(0.5), w, WaveState::delta(w, 0), {0.0, 50.0}, tight(), 51);
  std::vector<double> y;
  for (const auto& s : traj.states) y.push_back(std::abs(s.amp(1)));
  EXPECT_NEAR(testing::fit_slope(traj.times, y), s1, 0.01 * s1);
}

TEST(Evolve, PictureEquivalence) {
  const double v0 = 0.08;
  const double alpha = 0.3;
  const double sigma = 0.003;
  const ModeWindow w(-4, 6);
  const auto flux = FluxProgram::ramp(sigma, -40.0);
  const auto traj = evolve(make_reference_potential(v0, alpha), flux, w, WaveState::delta(w, 0), {0.0, 300.0}, tight(), 2);
  const auto direct_then_convert = to_interaction_picture(traj.states.back(), flux);

  const testing::InteractionRk4 rk4{w.n_min(), w.n_max(), v0 * (1.0 + alpha), v0 * (1.0 - alpha), sigma, -40.0};
  std::vector<Cplx> a0(static_cast<std::size_t>(w.size()));
  a0[static_cast<std::size_t>(w.index(0))] = 1.0;
  const auto a = rk4.run(a0, 0.0, 300.0, 0.002);
  for (int n = w.n_min(); n <= w.n_max(); ++n) {
    const Cplx ref = a[static_cast<std::size_t>(w.index(n))];
    EXPECT_NEAR(std::abs(direct_then_convert.amp(n)), std::abs(ref), 1e-8) << "n=" << n;
    EXPECT_LE(std::abs(direct_then_convert.amp(n) - ref), 1e-8) << "n=" << n;
  }
}

TEST(Evolve, TruncationRobustness) {
  const auto p = make_reference_potential(0.08, 0.3);
  const auto flux = FluxProgram::ramp(0.003);
  const std::pair<double, double> span{0.0, 700.0};
  const auto seed = WaveState::delta(ModeWindow(-3, 3), 0);
  const ModeWindow w = auto_window(seed, flux, span);
  const ModeWindow doubled(w.n_min() - w.size() / 2, w.n_max() + w.size() / 2);
  const auto a = evolve(p, flux, w, seed.on_window(w), span, tight(), 15);
  const auto b = evolve(p, flux, doubled, seed.on_window(doubled), span, tight(), 15);
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (int n = w.n_min(); n <= w.n_max(); ++n) {
      ASSERT_LE(std::abs(std::abs(a.states[k].amp(n)) - std::abs(b.states[k].amp(n))), 1e-8) << "n=" << n;
    }
  }
}

TEST(Evolve, BoundaryGuardAdvisesWiderWindow) {
  const ModeWindow w(-1, 3);
  try {
    evolve(make_reference_potential(0.08, 0.0), FluxProgram::ramp(0.003), w, WaveState::delta(w, 0), {0.0, 2000.0});
    FAIL() << "expected BoundaryMassExceeded";
  } catch (const BoundaryMassExceeded& e) {
    EXPECT_GT(e.fraction(), 1e-8);
    EXPECT_NE(std::string(e.what()).find("widen the window"), std::string::npos);
  }
}

TEST(Evolve, RejectsInconsistentInput) {
  const ModeWindow w(-3, 3);
  const auto p = make_reference_potential(0.08, 0.0);
  const auto flux = FluxProgram::ramp(0.003);
  EXPECT_THROW(evolve(p, flux, ModeWindow(-4, 4), WaveState::delta(w, 0), {0.0, 1.0}), InvalidParameter);
  const double backwards[] = {1.0, 0.5};
  EXPECT_THROW(evolve(p, flux, w, WaveState::delta(w, 0), std::span<const double>(backwards)), InvalidParameter);
  PropagatorConfig bad;
  bad.rtol = 0.0;
  EXPECT_THROW(evolve(p, flux, w, WaveState::delta(w, 0), {0.0, 1.0}, bad), InvalidParameter);
  const auto inter = to_interaction_picture(WaveState::delta(w, 0), flux);
  EXPECT_THROW(evolve(p, flux, w, inter, {0.0, 1.0}), InvalidParameter);
}

TEST(AutoWindow, ExtendsTowardDrift) {
  const auto seed = WaveState::delta(ModeWindow(-3, 3), 0);
  const auto up = auto_window(seed, FluxProgram::ramp(0.003), {0.0, 2000.0});
  const auto down = auto_window(seed, FluxProgram::ramp(-0.003), {0.0, 2000.0});
  EXPECT_EQ(up, ModeWindow(-6, 12));
  EXPECT_EQ(down, ModeWindow(-12, 6));
  EXPECT_EQ(auto_window(seed, FluxProgram::constant(0.5), {0.0, 2000.0}), ModeWindow(-6, 6));
}

TEST(Pictures, RoundTripAndModuli) {
  std::mt19937_64 rng(35);
  const ModeWindow w(-6, 6);
  for (int trial = 0; trial < 20; ++trial) {
    auto s = random_state(rng, w, -6, 6);
    s.tau = std::uniform_real_distribution<double>(0.0, 3000.0)(rng);
    const auto flux = FluxProgram::ramp(0.003, -500.0);
    const auto a = to_interaction_picture(s, flux);
    EXPECT_EQ(a.picture, Picture::Interaction);
    EXPECT_LE((a.amps.cwiseAbs() - s.amps.cwiseAbs()).cwiseAbs().maxCoeff(), 1e-15);
    const auto back = from_interaction_picture(a, flux);
    EXPECT_LE((back.amps - s.amps).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(to_interaction_picture(a, flux).amps, a.amps);
  }
}

TEST(Pictures, StaticPhase) {
  const ModeWindow w(-2, 2);
  const auto s = WaveState(3.0, w, Eigen::VectorXcd::Ones(5));
  const auto a = to_interaction_picture(s, FluxProgram::constant(0.25));
  for (int n = -2; n <= 2; ++n) {
    const double phase = free_energy(n, 0.25) * 3.0;
    EXPECT_LE(std::abs(a.amp(n) - std::polar(1.0, phase)), 1e-14);
  }
}

TEST(Wavefunction, DeltaStates) {
  const ModeWindow w(-2, 2);
  std::vector<double> phis;
  for (int j = 0; j < 16; ++j) phis.push_back(2.0 * std::numbers::pi * j / 16.0);
  const auto rest = reconstruct_wavefunction(WaveState::delta(w, 0), phis);
  const auto wind = reconstruct_wavefunction(WaveState::delta(w, 1), phis);
  const double level = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  for (std::size_t j = 0; j < phis.size(); ++j) {
    EXPECT_NEAR(std::abs(rest[j] - level), 0.0, 1e-15);
    EXPECT_NEAR(std::norm(wind[j]), 1.0 / (2.0 * std::numbers::pi), 1e-15);
    EXPECT_NEAR(std::abs(wind[j] - level * std::polar(1.0, phis[j])), 0.0, 1e-14);
  }
  EXPECT_THROW(reconstruct_wavefunction(to_interaction_picture(WaveState::delta(w, 0), FluxProgram::constant(0.1)), phis), InvalidParameter);
}

TEST(Wavefunction, ParsevalProperty) {
  std::mt19937_64 rng(36);
  std::vector<double> phis(2048);
  for (std::size_t j = 0; j < phis.size(); ++j) phis[j] = 2.0 * std::numbers::pi * static_cast<double>(j) / 2048.0;
  for (int trial = 0; trial < 20; ++trial) {
    const ModeWindow w(-20, 20);
    auto s = random_state(rng, w, -20, 20);
    s.amps *= std::uniform_real_distribution<double>(0.1, 10.0)(rng);
    const auto psi = reconstruct_wavefunction(s, phis);
    std::vector<double> dens;
    for (const auto& z : psi) dens.push_back(std::norm(z));
    EXPECT_NEAR(testing::periodic_trapezoid(dens), s.norm2(), 1e-8 * s.norm2());
  }
}

TEST(TrajectoryCsv, SchemaAndShortestDecimals) {
  const ModeWindow w(-1, 1);
  Trajectory t;
  t.times = {0.5};
  t.states.emplace_back(0.5, w, Eigen::VectorXcd::Zero(3));
  t.states[0].amps[1] = Complex(0.5, -0.25);
  t.norms = {t.states[0].norm2()};
  t.mean_winding = {0.0};
  std::ostringstream os;
  write_trajectory_csv(os, t);
  EXPECT_EQ(os.str(), "tau,n,re_c,im_c,abs2\n0.5,-1,0,0,0\n0.5,0,0.5,-0.25,0.3125\n0.5,1,0,0,0\n");

  std::ostringstream wf;
  const double phis[] = {0.0};
  write_wavefunction_csv(wf, t, phis);
  EXPECT_EQ(wf.str().substr(0, wf.str().find('\n')), "tau,phi,re_psi,im_psi,abs2");
}

}  // namespace
}  // namespace nhring
