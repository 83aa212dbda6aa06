#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "eul2d/dynamics.hpp"

using namespace eul2d;

namespace {

SineSeries two_mode() { return SineSeries({{1.0, 1, 1}, {0.3, 2, 1}}); }

SolverConfig base(int n, double dt, double T) {
  SolverConfig c;
  c.N = n;
  c.dt = dt;
  c.T = T;
  c.snapshot_stride = 1000000;
  return c;
}

double rel_l2(const ScalarField& a, const ScalarField& b) { return lp_norm(a - b, 2.0) / lp_norm(b, 2.0); }

double max_drift(const Trajectory& tr, double StepDiagnostics::*q) {
  const double q0 = tr.diagnostics.front().*q;
  double m = 0.0;
  for (const auto& d : tr.diagnostics) m = std::max(m, std::abs(d.*q - q0) / std::abs(q0));
  return m;
}

}  // namespace

TEST(Dynamics, InviscidArakawaConservesEnergyAndEnstrophy) {
  const Trajectory tr = run(base(64, 2e-3, 0.5), two_mode());
  ASSERT_TRUE(tr.complete);
  EXPECT_LE(max_drift(tr, &StepDiagnostics::energy), 1e-5);
  EXPECT_LE(max_drift(tr, &StepDiagnostics::enstrophy), 1e-5);
  // the flow must actually move for the check to mean anything
  EXPECT_GT(rel_l2(tr.final_state(), tr.snapshots[0]), 1e-2);
}

TEST(Dynamics, SingleEigenmodeIsStationary) {
  const Trajectory tr = run(base(32, 1e-2, 1.0), SineSeries::mode(1, 2, 1.5));
  ASSERT_TRUE(tr.complete);
  EXPECT_LE(rel_l2(tr.final_state(), tr.snapshots[0]), 1e-12);
}

TEST(Dynamics, ViscousEigenmodeDecaysAtExactDiscreteRate) {
  SolverConfig c = base(32, 1e-2, 0.5);
  c.nu = 0.05;
  const Trajectory tr = run(c, SineSeries::mode(2, 1));
  const double h = Grid(32).h();
  const double lam = (4.0 - 2.0 * std::cos(2 * std::numbers::pi * h) - 2.0 * std::cos(std::numbers::pi * h)) / (h * h);
  const ScalarField expect = std::exp(-c.nu * lam * c.T) * SineSeries::mode(2, 1).sample(Grid(32));
  EXPECT_LE(rel_l2(tr.final_state(), expect), 1e-10);
}

TEST(Dynamics, ZeroMultiplicativeCoefficientsReduceBitwiseToDeterministic) {
  SolverConfig det = base(32, 5e-3, 0.2);
  det.nu = 1e-3;
  SolverConfig mul = det;
  mul.noise.kind = NoiseKind::multiplicative;
  mul.noise.multiplicative = MultiplicativeNoise({{1, 0.0}, {2, 0.0}});
  mul.master_seed = 99;
  const Trajectory a = run(det, two_mode());
  const Trajectory b = run(mul, two_mode());
  EXPECT_TRUE(a.final_state() == b.final_state());
}

TEST(Dynamics, SameSeedIsBitwiseReproducible) {
  SolverConfig c = base(32, 5e-3, 0.2);
  c.nu = 1e-3;
  c.noise.kind = NoiseKind::additive;
  c.noise.additive = AdditiveNoise::standard(4.0, 3);
  c.master_seed = 7;
  const Trajectory a = run(c, two_mode());
  const Trajectory b = run(c, two_mode());
  EXPECT_TRUE(a.final_state() == b.final_state());
  c.master_seed = 8;
  EXPECT_FALSE(run(c, two_mode()).final_state() == a.final_state());
}

TEST(Dynamics, StatesDependOnlyOnPastNoise) {
  for (NoiseKind kind : {NoiseKind::additive, NoiseKind::multiplicative}) {
    SolverConfig c = base(32, 1e-2, 0.2);
    c.nu = 1e-3;
    c.snapshot_stride = 1;
    c.noise.kind = kind;
    c.noise.additive = AdditiveNoise::standard(4.0, 3);
    c.noise.multiplicative = MultiplicativeNoise::standard(3);
    const ScalarField b0 = two_mode().sample(Grid(32));
    const NoiseRecord rec = sample_noise_record(c);
    NoiseRecord altered = rec;
    const std::size_t cut = 10;
    for (auto& path : altered.paths) {
      for (std::size_t n = cut + 1; n < path.size(); ++n) path[n] += 0.5;
    }
    const Trajectory a = run(c, b0, rec);
    const Trajectory b = run(c, b0, altered);
    for (std::size_t n = 0; n <= cut; ++n) EXPECT_TRUE(a.snapshots[n] == b.snapshots[n]) << n;
    EXPECT_FALSE(a.final_state() == b.final_state());
  }
}

TEST(Dynamics, NoiseRecordComesFromPerModeStreams) {
  SolverConfig c = base(16, 0.25, 1.0);
  c.noise.kind = NoiseKind::additive;
  c.noise.additive = AdditiveNoise::standard(1.0, 2);
  c.master_seed = 3;
  c.path_index = 5;
  const NoiseRecord r = sample_noise_record(c);
  ASSERT_EQ(r.modes(), 4u);
  ASSERT_EQ(r.steps(), 4u);
  RngStream s(3, 5 * 1024 + 2);
  EXPECT_EQ(r.paths[2], sample_brownian_path(s, 1.0, 0.25).entries());
}

TEST(Dynamics, FirstOrderInTimeWithViscousSplitting) {
  auto terminal = [](double dt) {
    SolverConfig c = base(32, dt, 0.5);
    c.nu = 2e-2;
    return run(c, two_mode()).final_state();
  };
  const ScalarField a = terminal(2e-2), b = terminal(1e-2), d = terminal(5e-3);
  const double ratio = lp_norm(a - b, 2.0) / lp_norm(b - d, 2.0);
  EXPECT_GE(ratio, 1.8);
  EXPECT_LE(ratio, 2.3);
}

TEST(Dynamics, MultiplicativeDecompositionSumsToIncrement) {
  SolverConfig c = base(32, 1e-2, 0.3);
  c.nu = 1e-2;
  c.snapshot_stride = 10;
  c.record_decomposition = true;
  c.noise.kind = NoiseKind::multiplicative;
  c.noise.multiplicative = MultiplicativeNoise::standard(3);
  c.forcing_curl = SineSeries::mode(1, 1, 2.0);
  const Trajectory tr = run(c, two_mode());
  ASSERT_EQ(tr.decomposition.size(), tr.snapshots.size());
  for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
    const Decomposition& p = tr.decomposition[k];
    const ScalarField sum = p.diffusion + p.advection + p.forcing + p.noise;
    EXPECT_LE(linf_norm(sum - (tr.snapshots[k] - tr.snapshots[0])), 1e-12);
    EXPECT_NEAR(linf_norm(p.forcing), 2.0 * tr.snapshots.time(k) * linf_norm(SineSeries::mode(1, 1).sample(Grid(32))),
                1e-12);
  }
  EXPECT_GT(linf_norm(tr.decomposition.back().noise), 0.0);
}

TEST(Dynamics, CflViolationEndsRunIncomplete) {
  SolverConfig c = base(32, 0.05, 1.0);
  const Trajectory tr = run(c, SineSeries({{50.0, 1, 1}, {50.0, 2, 3}}));
  EXPECT_FALSE(tr.complete);
  EXPECT_NE(tr.error.find("CFL"), std::string::npos) << tr.error;
  EXPECT_EQ(tr.diagnostics.size(), 1u);
}

TEST(Dynamics, AdditiveZBoundUnderUpwind) {
  SolverConfig c = base(32, 5e-3, 0.5);
  c.nu = 1e-2;
  c.advection = AdvectionScheme::upwind;
  c.noise.kind = NoiseKind::additive;
  c.noise.additive = AdditiveNoise::standard(2.0, 3);
  c.master_seed = 11;
  const Trajectory tr = run(c, two_mode());
  ASSERT_TRUE(tr.complete);
  ASSERT_EQ(tr.additive.size(), c.steps());
  double budget = linf_norm(tr.snapshots[0]);
  for (const auto& r : tr.additive) {
    budget += r.g_integral;
    EXPECT_LE(r.linf_z, budget * (1 + 1e-12));
  }
}

TEST(Dynamics, DiagnosticsAndSnapshotsLayout) {
  SolverConfig c = base(16, 0.1, 1.0);
  c.snapshot_stride = 3;
  const Trajectory tr = run(c, two_mode());
  ASSERT_EQ(tr.diagnostics.size(), 11u);
  EXPECT_EQ(tr.snapshot_steps, (std::vector<std::size_t>{0, 3, 6, 9, 10}));
  EXPECT_DOUBLE_EQ(tr.diagnostics.back().t, 1.0);
  EXPECT_DOUBLE_EQ(tr.snapshots.time(4), 1.0);
}

TEST(Dynamics, RejectsBadConfiguration) {
  SolverConfig c = base(16, 0.3, 1.0);
  EXPECT_THROW(run(c, two_mode()), std::invalid_argument);
  c = base(16, 0.1, 1.0);
  c.nu = -1.0;
  EXPECT_THROW(run(c, two_mode()), std::invalid_argument);
  c = base(16, 0.1, 1.0);
  EXPECT_THROW(run(c, two_mode().sample(Grid(32))), std::invalid_argument);
}

TEST(Dynamics, PerStepInvariantDriftIsTiny) {
  const Trajectory tr = run(base(64, 2e-3, 0.1), two_mode());
  for (std::size_t n = 1; n < tr.diagnostics.size(); ++n) {
    const auto &a = tr.diagnostics[n - 1], &b = tr.diagnostics[n];
    EXPECT_LE(std::abs(b.energy - a.energy) / a.energy, 1e-10);
    EXPECT_LE(std::abs(b.enstrophy - a.enstrophy) / a.enstrophy, 1e-10);
  }
}

TEST(Dynamics, ViscousEnstrophyIsNonIncreasingAndOrderedInNu) {
  SolverConfig a = base(32, 1e-2, 0.5), b = a;
  a.nu = 1e-2;
  b.nu = 1e-3;
  const Trajectory ta = run(a, two_mode()), tb = run(b, two_mode());
  for (std::size_t n = 1; n < ta.diagnostics.size(); ++n) {
    EXPECT_LE(ta.diagnostics[n].enstrophy, ta.diagnostics[n - 1].enstrophy * (1 + 1e-12));
    EXPECT_LE(ta.diagnostics[n].enstrophy, tb.diagnostics[n].enstrophy * (1 + 1e-12));
  }
}

TEST(Dynamics, ZeroStateTracksSingleModeNoiseCurl) {
  // u = sigma W perp grad psi_m and curl W = sigma W lambda psi_m, so the
  // advection of curl W vanishes and beta(t) = curl W(t).
  SolverConfig c = base(32, 1e-2, 0.5);
  c.snapshot_stride = 1;
  c.noise.kind = NoiseKind::additive;
  c.noise.additive = AdditiveNoise({{2, 1, 0.3}});
  c.master_seed = 4;
  const Trajectory tr = run(c, ScalarField(Grid(32)));
  ASSERT_TRUE(tr.complete);
  for (std::size_t n = 0; n < tr.snapshots.size(); n += 10) {
    const double w = tr.noise.paths[0][n];
    const ScalarField expect = SineSeries::mode(2, 1, 0.3 * w * SineTerm{1, 2, 1}.eigenvalue()).sample(Grid(32));
    EXPECT_LE(linf_norm(tr.snapshots[n] - expect), 1e-12 * (1 + linf_norm(expect))) << n;
  }
}

TEST(Dynamics, ConstantCoefficientNoiseScalesState) {
  // c = 1: grad c = 0, the kick is beta dB; an eigenmode is not advected.
  SolverConfig c = base(32, 1e-2, 1.0);
  c.noise.kind = NoiseKind::multiplicative;
  c.noise.multiplicative = MultiplicativeNoise({{0, 1.0}});
  const Dynamics dyn(c);
  const ScalarField b = SineSeries::mode(1, 1, 2.0).sample(Grid(32));
  const std::vector<double> db = {0.07};
  const ScalarField next = step_multiplicative(dyn, b, db);
  EXPECT_LE(linf_norm(next - 1.07 * b), 1e-13);
}

TEST(Dynamics, StrongViscosityDrainsMeanEnstrophy) {
  SolverConfig c = base(16, 1e-2, 0.5);
  c.nu = 1.0;
  c.noise.kind = NoiseKind::multiplicative;
  c.noise.multiplicative = MultiplicativeNoise::standard(3);
  double start = 0.0, end = 0.0;
  for (std::uint64_t p = 0; p < 32; ++p) {
    c.path_index = p;
    const Trajectory tr = run(c, two_mode());
    start += tr.diagnostics.front().enstrophy / 32;
    end += tr.diagnostics.back().enstrophy / 32;
  }
  EXPECT_LT(end, 0.1 * start);
}

TEST(Dynamics, VelocityIsTangentAtWalls) {
  const Trajectory tr = run(base(32, 1e-2, 0.2), two_mode());
  const VectorField u = recover_velocity(tr.final_state());
  const Padded a = u.u1().padded(), b = u.u2().padded();
  double worst = 0.0;
  for (int k = -1; k <= 32; ++k) {
    worst = std::max({worst, std::abs(a.at(-1, k)), std::abs(a.at(32, k)), std::abs(b.at(k, -1)), std::abs(b.at(k, 32))});
  }
  EXPECT_LE(worst, 1e-12);
}
