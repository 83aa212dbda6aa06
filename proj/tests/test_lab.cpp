#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "eul2d/lab.hpp"

using namespace eul2d;

namespace {

SineSeries three_mode() { return SineSeries({{1.0, 1, 1}, {0.5, 2, 1}, {0.3, 1, 3}}); }

SolverConfig small(int n, double dt, double T) {
  SolverConfig c;
  c.N = n;
  c.dt = dt;
  c.T = T;
  c.snapshot_stride = 1;
  return c;
}

SolverConfig with_additive(SolverConfig c, double sigma0, std::uint64_t seed = 5) {
  c.noise.kind = NoiseKind::additive;
  c.noise.additive = AdditiveNoise::standard(sigma0, 3);
  c.master_seed = seed;
  return c;
}

SolverConfig with_multiplicative(SolverConfig c, std::uint64_t seed = 5) {
  c.noise.kind = NoiseKind::multiplicative;
  c.noise.multiplicative = MultiplicativeNoise::standard(3);
  c.master_seed = seed;
  return c;
}

}  // namespace

// ---------------------------------------------------------------- weak form

TEST(WeakResidual, StationaryEigenmodeIsResidualFree) {
  SolverConfig c = small(32, 1e-2, 1.0);
  c.test_modes = 6;
  const Trajectory tr = run(c, SineSeries::mode(1, 1, 2.0));
  const auto r = weak_residual_check(tr, {6, 1e-6});
  EXPECT_TRUE(r.pass()) << r.to_text();
  EXPECT_LE(r.value("max_residual"), 1e-12);
}

TEST(WeakResidual, ZeroSolutionHasZeroResidual) {
  SolverConfig c = small(16, 0.1, 1.0);
  c.test_modes = 3;
  const Trajectory tr = run(c, ScalarField(Grid(16)));
  EXPECT_EQ(weak_residual_check(tr, {3, 0.0}).value("max_residual"), 0.0);
}

TEST(WeakResidual, FirstOrderInTimeSecondOrderInSpace) {
  // 64 steps, so the three time levels share one nested Brownian path
  const SolverConfig c = with_additive(small(31, 1.0 / 128, 0.5), 1.0);
  const auto r = weak_residual_refinement(c, three_mode());
  EXPECT_TRUE(r.pass()) << r.to_text();
  EXPECT_NEAR(r.value("dt_ratio"), 2.0, 0.2);
  EXPECT_GE(r.value("h_ratio"), 3.5);
}

TEST(WeakResidual, RequiresRecordedModesAndNoise) {
  SolverConfig c = small(16, 0.1, 0.5);
  Trajectory tr = run(c, three_mode());
  EXPECT_THROW(weak_residual_check(tr, {2, 1.0}), std::invalid_argument);
  c = with_additive(c, 1.0);
  c.test_modes = 2;
  tr = run(c, three_mode());
  tr.noise.paths.clear();
  EXPECT_THROW(weak_residual_check(tr, {2, 1.0}), std::invalid_argument);
}

// ---------------------------------------------------------------- uniform in nu

TEST(UniformInNu, NoiseFreeSupIsInitialEnstrophy) {
  SolverConfig c = small(32, 1e-2, 0.3);
  const auto r = uniform_in_nu_study(c, three_mode(), {{1e-2, 1e-3, 1e-4}, 2.0});
  EXPECT_TRUE(r.pass());
  EXPECT_DOUBLE_EQ(r.value("ratio_beta_l2"), 1.0);
  const double b0 = lp_norm(three_mode().sample(Grid(32)), 2.0);
  EXPECT_NEAR(r.value("sup_beta_l2[0.001]"), b0, 1e-12 * b0);
}

TEST(UniformInNu, RepeatedViscosityGivesIdenticalNumbers) {
  const SolverConfig c = with_additive(small(16, 1e-2, 0.2), 1.0);
  const auto r = uniform_in_nu_study(c, three_mode(), {{1e-3, 1e-3}, 2.0});
  EXPECT_EQ(r.measurements()[0].value, r.measurements()[2].value);
  EXPECT_EQ(r.value("ratio_beta_l2"), 1.0);
}

TEST(UniformInNu, RejectsIncreasingList) {
  EXPECT_THROW(uniform_in_nu_study(small(16, 0.1, 0.2), three_mode(), {{1e-3, 1e-2}, 2.0}), std::invalid_argument);
}

// ---------------------------------------------------------------- vanishing viscosity

TEST(VanishingViscosity, EigenmodeDistancesMatchClosedForm) {
  // u_nu = exp(-nu lambda_h t) u_0 exactly, so
  // |u_nu - u_0|_{L2(Q)}^2 = |u_0|^2 int_0^T (1 - exp(-nu lambda_h t))^2 dt.
  SolverConfig c = small(32, 1.0 / 64, 1.0);
  const std::vector<double> nus = {1e-2, 2.5e-3, 6.25e-4};
  const auto r = vanishing_viscosity_convergence(c, SineSeries::mode(1, 1), {nus});
  EXPECT_TRUE(r.pass()) << r.to_text();
  const Grid g(32);
  const double h = g.h();
  const double lam = 2.0 * (2.0 - 2.0 * std::cos(std::numbers::pi * h)) / (h * h);
  const double u0sq = lp_norm(SineSeries::mode(1, 1).sample(g), 2.0) * lp_norm(SineSeries::mode(1, 1).sample(g), 2.0) / lam;
  for (double nu : nus) {
    const double a = nu * lam;
    const double T = 1.0;
    const double integral = T - 2.0 * (1.0 - std::exp(-a * T)) / a + (1.0 - std::exp(-2.0 * a * T)) / (2.0 * a);
    const double expect = std::sqrt(u0sq * integral);
    EXPECT_NEAR(r.value("dist_to_euler[" + format_double(nu) + "]"), expect, 2e-3 * expect) << nu;
  }
}

TEST(VanishingViscosity, ViscousPairingOfFirstModeIsItsEigenvalue) {
  // phi_1 = perp grad sin sin: int grad phi_1 : grad phi_1 = lambda_1 |phi_1|^2 = lambda_1^2 / 4
  const Grid g(128);
  const VectorField u = SineSeries::mode(1, 1).sample_perp_gradient(g);
  const double lam = 2.0 * std::numbers::pi * std::numbers::pi;
  EXPECT_NEAR(viscous_pairing(u), lam * lam / 4.0, 2e-3 * lam * lam);
}

TEST(VanishingViscosity, SingleViscosityIsInsufficientData) {
  const auto r = vanishing_viscosity_convergence(small(16, 0.05, 0.5), three_mode(), {{1e-2}});
  EXPECT_TRUE(r.pass());
  ASSERT_FALSE(r.notes().empty());
  EXPECT_NE(r.notes()[0].find("insufficient data"), std::string::npos);
}

// ---------------------------------------------------------------- maximum principle

TEST(MaximumPrinciple, HomogeneousUpwindRunRespectsInitialBound) {
  SolverConfig c = small(32, 1e-2, 0.5);
  c.advection = AdvectionScheme::upwind;
  c.nu = 1e-3;
  const auto r = maximum_principle_check(c, three_mode());
  EXPECT_TRUE(r.pass()) << r.to_text();
  EXPECT_EQ(r.value("g_integral"), 0.0);
  EXPECT_LE(r.value("sup_z_linf"), r.value("z0_linf") * (1 + 1e-3));
}

TEST(MaximumPrinciple, ZeroDataWithNoiseIsBoundedByForcingIntegral) {
  SolverConfig c = with_additive(small(32, 1e-2, 0.5), 1.0);
  c.advection = AdvectionScheme::upwind;
  c.nu = 1e-2;
  const auto r = maximum_principle_check(c, ScalarField(Grid(32)));
  EXPECT_TRUE(r.pass()) << r.to_text();
  EXPECT_EQ(r.value("z0_linf"), 0.0);
  EXPECT_GT(r.value("g_integral"), 0.0);
}

TEST(MaximumPrinciple, PositiveSourceKeepsVorticityNonnegative) {
  SolverConfig c = small(16, 1e-2, 0.5);
  c.advection = AdvectionScheme::upwind;
  c.nu = 1e-2;
  c.forcing_curl = SineSeries::mode(1, 1, 3.0);
  const auto r = maximum_principle_check(c, SineSeries::mode(1, 1, 0.5));
  EXPECT_TRUE(r.pass());
  EXPECT_GE(r.value("min_z"), -1e-3 * r.value("sup_z_linf"));
}

TEST(MaximumPrinciple, RejectsArakawa) {
  EXPECT_THROW(maximum_principle_check(small(16, 0.1, 0.5), three_mode()), std::invalid_argument);
}

// ---------------------------------------------------------------- Kato

TEST(Kato, SlopeStaysBelowSquareRootGrowth) {
  KatoParams p;
  p.samples = 20;
  p.N = 64;
  const auto r = kato_constant_estimate(p);
  EXPECT_TRUE(r.pass()) << r.to_text();
  EXPECT_GT(r.value("slope"), 0.0);
}

TEST(Kato, RandomFieldMatchesSineSeriesSampling) {
  // the transform-based sampler against direct evaluation of the same series
  const Grid g(16);
  const SineTransform tr(g);
  RngStream a(3, 0), b(3, 0);
  const ScalarField v = random_band_limited_field(tr, 4, a);
  std::vector<SineTerm> terms;
  for (int l = 1; l <= 4; ++l)
    for (int k = 1; k <= 4; ++k) terms.push_back({b.normal() / (k * k + l * l), k, l});
  EXPECT_LE(linf_norm(v - SineSeries(terms).sample(g)), 1e-13);
}

TEST(Kato, RejectsExponentBelowTwo) {
  KatoParams p;
  p.p_list = {1.5, 4};
  EXPECT_THROW(kato_constant_estimate(p), std::invalid_argument);
}

// ---------------------------------------------------------------- W^{1,p}

TEST(W1p, EigenmodeNormsAreTimeIndependentAndMatchH1) {
  const SolverConfig c = small(32, 1e-2, 0.3);
  const auto r = w1p_growth_study(c, SineSeries::mode(1, 1));
  EXPECT_TRUE(r.pass()) << r.to_text();
  const VectorField u0 = recover_velocity(SineSeries::mode(1, 1).sample(Grid(32)));
  EXPECT_NEAR(r.value("sup_w1p[8]"), w1p_norm(u0, 8.0), 1e-12);
  EXPECT_EQ(r.value("p2_equals_h1_diagnostic"), 1.0);
}

TEST(W1p, NoisyRunGrowsAtMostLinearly) {
  const SolverConfig c = with_additive(small(32, 1e-2, 0.5), 1.0);
  const auto r = w1p_growth_study(c, three_mode());
  EXPECT_TRUE(r.pass()) << r.to_text();
}

// ---------------------------------------------------------------- Yudovich

TEST(Yudovich, ZeroPerturbationOnlyIsTrivialPass) {
  SolverConfig c = small(16, 0.05, 0.5);
  YudovichParams p;
  p.delta_list = {0.0};
  const auto r = yudovich_stability(c, three_mode(), p);
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(r.value("identical_data_bitwise"), 1.0);
  EXPECT_TRUE(std::isnan(r.value("C_estimate")));
}

TEST(Yudovich, SeparationGrowsWithPerturbation) {
  SolverConfig c = with_additive(small(32, 1.0 / 64, 1.0), 1.0);
  c.snapshot_stride = 4;
  const auto r = yudovich_stability(c, three_mode());
  EXPECT_TRUE(r.pass()) << r.to_text();
  // linear response: a decade in delta is close to a decade in separation
  EXPECT_NEAR(r.value("contraction[delta=0.001,t=0.25]"), 0.1, 0.02);
}

TEST(Yudovich, RejectsViscousRuns) {
  SolverConfig c = small(16, 0.05, 0.5);
  c.nu = 1e-3;
  EXPECT_THROW(yudovich_stability(c, three_mode()), std::invalid_argument);
}

TEST(Yudovich, EnvelopeIsSmallForShortTimes) {
  EXPECT_LT(yudovich_envelope(1.0, 0.1), yudovich_envelope(1.0, 0.5));
  EXPECT_TRUE(std::isfinite(yudovich_envelope(2.0, 0.4)));
}

// ---------------------------------------------------------------- moments

TEST(Moments, ZeroCoefficientsGiveDeterministicEstimates) {
  SolverConfig c = small(16, 0.05, 0.5);
  c.snapshot_stride = 10;
  c.noise.kind = NoiseKind::multiplicative;
  c.noise.multiplicative = MultiplicativeNoise({{1, 0.0}, {2, 0.0}});
  const EnsembleSet set = {run_ensemble(c, three_mode(), 8)};
  const auto r = moment_estimator(set);
  EXPECT_TRUE(r.pass()) << r.to_text();
  EXPECT_EQ(r.value("ci_lower_sup_u_l2^2[nu=0]"), r.value("ci_upper_sup_u_l2^2[nu=0]"));
}

TEST(Moments, CrossViscosityRatioAndJensen) {
  SolverConfig c = with_multiplicative(small(16, 0.02, 0.5));
  c.snapshot_stride = 25;
  c.w1p_orders = {2, 4, 8};
  EnsembleSet set;
  for (double nu : {1e-2, 1e-3}) {
    c.nu = nu;
    set.push_back(run_ensemble(c, three_mode(), 12));
  }
  const auto m = moment_estimator(set);
  EXPECT_TRUE(m.pass()) << m.to_text();
  const auto e = enstrophy_moment_estimator(set);
  EXPECT_TRUE(e.pass()) << e.to_text();
  const auto b = banach_moment_diagnostic(set, {2, 4, 8});
  EXPECT_TRUE(b.pass()) << b.to_text();
  // q = 2 column is the enstrophy estimator
  EXPECT_EQ(b.value("E_sup_u_w1q[q=2]^2[nu=0.01]"), e.value("E_sup_u_h1^2[nu=0.01]"));
  EXPECT_EQ(b.value("E_sup_u_w1q[q=2]^4[nu=0.001]"), e.value("E_sup_u_h1^4[nu=0.001]"));
}

TEST(Moments, RefusesSmallEnsembles) {
  SolverConfig c = with_multiplicative(small(16, 0.05, 0.2));
  c.snapshot_stride = 4;
  const EnsembleSet set = {run_ensemble(c, three_mode(), 4)};
  EXPECT_THROW(moment_estimator(set), std::invalid_argument);
}

TEST(Stats, BootstrapIsDeterministicAndBracketsMean) {
  const std::vector<double> x = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const Interval a = bootstrap_mean(x, 500, 0.9, 4), b = bootstrap_mean(x, 500, 0.9, 4);
  EXPECT_EQ(a.lower, b.lower);
  EXPECT_EQ(a.upper, b.upper);
  EXPECT_DOUBLE_EQ(a.estimate, 5.5);
  EXPECT_LT(a.lower, 5.5);
  EXPECT_GT(a.upper, 5.5);
  EXPECT_NEAR(fit_slope(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 6}), 2.0, 1e-15);
}

// ---------------------------------------------------------------- tightness

TEST(Tightness, DeterministicRunHasNoNoiseTerm) {
  SolverConfig c = small(16, 0.02, 0.5);
  c.nu = 1e-2;
  c.snapshot_stride = 5;
  c.record_decomposition = true;
  c.noise.kind = NoiseKind::multiplicative;
  c.noise.multiplicative = MultiplicativeNoise({{1, 0.0}});
  c.forcing_curl = SineSeries::mode(1, 2, 1.0);
  const Trajectory tr = run(c, three_mode());
  const PoissonSolver solver{Grid(16)};
  const auto j = j_term_norms(tr, solver, 0.4, 2.0);
  EXPECT_EQ(j[4], 0.0);
  EXPECT_GT(j[1], 0.0);
  EXPECT_GT(j[2], 0.0);
  EXPECT_GT(j[3], 0.0);
}

TEST(Tightness, ConstantPathHasNoDoubleIntegral) {
  TimeSeries<double> s;
  for (int k = 0; k <= 10; ++k) s.push_back(0.1 * k, 3.0);
  const auto parts = fractional_time_norm_parts(s, 0.4, 2.0, [](double v) { return std::abs(v); });
  EXPECT_EQ(parts.double_term, 0.0);
}

TEST(Tightness, BoundedAcrossViscosities) {
  SolverConfig c = with_multiplicative(small(16, 0.02, 0.5));
  c.snapshot_stride = 1;
  c.record_decomposition = true;
  EnsembleSet set;
  for (double nu : {1e-2, 1e-3}) {
    c.nu = nu;
    set.push_back(run_ensemble(c, three_mode(), 4));
  }
  const auto r = tightness_diagnostic(set);
  EXPECT_TRUE(r.pass()) << r.to_text();
  EXPECT_GT(r.value("mean_J5_noise[0.01]"), 0.0);
}

TEST(Tightness, RejectsGammaAtOneHalf) {
  EnsembleSet set;
  TightnessParams p;
  p.gamma = 0.5;
  EXPECT_THROW(tightness_diagnostic(set, p), std::invalid_argument);
}
