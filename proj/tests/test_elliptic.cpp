#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "eul2d/elliptic.hpp"
#include "eul2d/sine_series.hpp"

using namespace eul2d;
using std::numbers::pi;

namespace {

// Eigenvalue of the 5-point Dirichlet Laplacian for mode (k, l), 1-based,
// written with cosines to stay independent of the library formula.
double discrete_eigenvalue(int k, int l, double h) {
  return (2.0 - 2.0 * std::cos(k * pi * h) + 2.0 - 2.0 * std::cos(l * pi * h)) / (h * h);
}

ScalarField random_band_limited(const Grid& g, unsigned seed, int kmax = 3) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d;
  std::vector<SineTerm> terms;
  for (int k = 1; k <= kmax; ++k)
    for (int l = 1; l <= kmax; ++l) terms.push_back({d(gen) / (k * k + l * l), k, l});
  return SineSeries(terms).sample(g);
}

double rel_l2(const ScalarField& a, const ScalarField& b) { return lp_norm(a - b, 2.0) / lp_norm(b, 2.0); }

}  // namespace

TEST(SineTransform, InverseAndParseval) {
  Grid g(32);
  auto f = random_band_limited(g, 1, 8);
  SineTransform t(g);
  auto y = t.forward(f.values());
  auto back = t.inverse(y);
  double ss = 0.0;
  for (double v : y) ss += v * v;
  for (std::size_t k = 0; k < back.size(); ++k) EXPECT_NEAR(back[k], f.values()[k], 1e-13);
  EXPECT_NEAR(std::sqrt(ss * t.l2_weight()), lp_norm(f, 2.0), 1e-13);
}

TEST(Poisson, FirstEigenmodeExactInDiscreteBasis) {
  Grid g(64);
  PoissonSolver solver(g);
  auto beta = ScalarField::sample(g, [](double x, double y) { return 2 * pi * pi * std::sin(pi * x) * std::sin(pi * y); });
  auto psi = solve_streamfunction(beta, solver);
  const double scale = 2 * pi * pi / discrete_eigenvalue(1, 1, g.h());
  for (int j = 0; j < 64; j += 7)
    for (int i = 0; i < 64; i += 5)
      EXPECT_NEAR(psi(i, j), scale * std::sin(pi * g.coord(i)) * std::sin(pi * g.coord(j)), 1e-13);
  EXPECT_NEAR(scale, 1.0, 2 * pi * pi * g.h() * g.h() / 12 * 1.01);
}

TEST(Poisson, ZeroAndLinearity) {
  Grid g(32);
  PoissonSolver solver(g);
  for (double v : solver.solve(ScalarField(g)).values()) EXPECT_EQ(v, 0.0);
  auto b1 = random_band_limited(g, 2, 10), b2 = random_band_limited(g, 3, 10);
  ScalarField comb = b2;
  comb.axpy(-2.5, b1);
  ScalarField expect = solver.solve(b2);
  expect.axpy(-2.5, solver.solve(b1));
  EXPECT_LE(rel_l2(solver.solve(comb), expect), 1e-12);
}

TEST(Poisson, ModeTwoThreeDiscreteEigenpair) {
  Grid g(64);
  PoissonSolver solver(g);
  auto mode = [](double x, double y) { return std::sin(2 * pi * x) * std::sin(3 * pi * y); };
  auto beta = ScalarField::sample(g, [&](double x, double y) { return 13 * pi * pi * mode(x, y); });
  auto psi = solver.solve(beta);
  auto exact_discrete = ScalarField::sample(g, mode);
  exact_discrete *= 13 * pi * pi / discrete_eigenvalue(2, 3, g.h());
  EXPECT_LE(rel_l2(psi, exact_discrete), 1e-13);
  // against the continuous solution the error is the O(h^2) stencil error
  const double e = rel_l2(psi, ScalarField::sample(g, mode));
  EXPECT_GT(e, 1e-5);
  EXPECT_LT(e, 13 * pi * pi * g.h() * g.h() / 12 * 1.05);
}

TEST(Poisson, RelaxationAgreesWithSineRoute) {
  Grid g(32);
  PoissonSolver sine(g), sor(g, PoissonMethod::relaxation, 1e-10);
  auto beta = random_band_limited(g, 7, 12);
  auto r = sor.relax(beta);
  EXPECT_GT(r.iterations, 0);
  EXPECT_LE(r.relative_residual, 1e-10);
  EXPECT_LE(rel_l2(r.psi, sine.solve(beta)), 1e-9);
  PoissonSolver starved(g, PoissonMethod::relaxation, 1e-12, 8);
  EXPECT_THROW(starved.solve(beta), NumericalError);
}

TEST(RecoverVelocity, EigenmodeAndConstraints) {
  Grid g(64);
  auto beta = ScalarField::sample(g, [](double x, double y) { return 2 * pi * pi * std::sin(pi * x) * std::sin(pi * y); });
  auto u = recover_velocity(beta);
  auto exact = VectorField::sample(
      g, [](double x, double y) { return std::pair{pi * std::sin(pi * x) * std::cos(pi * y), -pi * std::cos(pi * x) * std::sin(pi * y)}; },
      true);
  EXPECT_LT(lp_norm(u - exact, 2.0), 10 * g.h() * g.h());
  for (double v : recover_velocity(ScalarField(g)).u1().values()) EXPECT_EQ(v, 0.0);
  // arbitrary vorticity still gives a divergence-free, tangent field
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> d(-1, 1);
  ScalarField rough(g);
  for (double& v : rough.values()) v = d(gen);
  auto ur = recover_velocity(rough);
  EXPECT_LE(linf_norm(divergence(ur)), 1e-10 * 64 * linf_norm(ur) / g.h());
  Padded p1 = ur.u1().padded(), p2 = ur.u2().padded();
  for (int j = 0; j < 64; ++j) {
    EXPECT_EQ(p1.at(-1, j), 0.0);
    EXPECT_EQ(p1.at(64, j), 0.0);
    EXPECT_EQ(p2.at(j, -1), 0.0);
    EXPECT_EQ(p2.at(j, 64), 0.0);
  }
}

TEST(RecoverVelocity, CurlConsistencyOnRandomVorticity) {
  Grid g(64);
  auto beta = random_band_limited(g, 17);
  auto c = curl(recover_velocity(beta));
  c.set_extension(Extension::dirichlet());
  EXPECT_LE(rel_l2(c, beta), 5e-3);
  // the same measurement converges at second order
  Grid fine(128);
  auto bf = random_band_limited(fine, 17);
  auto cf = curl(recover_velocity(bf));
  cf.set_extension(Extension::dirichlet());
  const double ratio = rel_l2(c, beta) / rel_l2(cf, bf);
  EXPECT_GT(ratio, 3.5);
  EXPECT_LT(ratio, 4.5);
}

TEST(GradientBound, EigenmodeClosedForm) {
  Grid g(64);
  auto beta = ScalarField::sample(g, [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); });
  auto r = gradient_bound_check(beta);
  // continuum value lambda / (lambda + 1) with lambda = 2 pi^2
  const double lam = 2 * pi * pi;
  EXPECT_NEAR(r.value("empirical_constant"), lam / (lam + 1), 2e-3);
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(gradient_bound_check(ScalarField(g)).value("empirical_constant"), 0.0);
}

TEST(GradientBound, StableAcrossResolutions) {
  double worst[3] = {0, 0, 0};
  int idx = 0;
  for (int n : {32, 64, 128}) {
    Grid g(n);
    PoissonSolver solver(g);
    for (unsigned s = 0; s < 100; ++s) {
      worst[idx] = std::max(worst[idx], gradient_bound_check(random_band_limited(g, 100 + s), solver).value("empirical_constant"));
    }
    ++idx;
  }
  for (double w : worst) {
    EXPECT_TRUE(std::isfinite(w));
    EXPECT_LE(w, 1.05);
  }
  EXPECT_NEAR(worst[1], worst[2], 0.02);
}

TEST(AdvectDiffuse, HeatEigenmodeDecay) {
  Grid g(32);
  PoissonSolver solver(g);
  const double nu = 0.05, dt = 0.01;
  TimeSeries<VectorField> u;
  TimeSeries<ScalarField> src;
  for (int n = 0; n < 20; ++n) {
    u.push_back(n * dt, perp_gradient(ScalarField(g)));
    src.push_back(n * dt, ScalarField(g));
  }
  auto v0 = ScalarField::sample(g, [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); });
  auto v = solve_advect_diffuse(u, src, v0, nu, dt, solver);
  ASSERT_EQ(v.size(), 21u);
  const double decay = std::exp(-2 * pi * pi * nu * 20 * dt);
  EXPECT_NEAR(lp_norm(v[20], 2.0) / lp_norm(v0, 2.0), decay, 2e-3);
  auto zero = solve_advect_diffuse(u, src, ScalarField(g), nu, dt, solver);
  for (double x : zero[20].values()) EXPECT_EQ(x, 0.0);
  EXPECT_THROW(solve_advect_diffuse(u, src, v0, 0.0, dt, solver), std::invalid_argument);
}

TEST(AdvectDiffuse, RotationMaximumPrincipleAndEnergy) {
  Grid g(32);
  PoissonSolver solver(g);
  // streamfunction with an r^2 profile around the centre, zero on the walls
  auto psi = ScalarField::sample(g, [](double x, double y) {
    const double r2 = (x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5);
    return r2 * x * (1 - x) * y * (1 - y) * 16;
  });
  auto u = perp_gradient(psi);
  const double dt = 0.4 * g.h() / linf_norm(u);
  TimeSeries<VectorField> up;
  TimeSeries<ScalarField> src;
  for (int n = 0; n < 60; ++n) {
    up.push_back(n * dt, u);
    src.push_back(n * dt, ScalarField(g));
  }
  auto v0 = ScalarField::sample(g, [](double x, double y) { return std::exp(-40 * ((x - 0.3) * (x - 0.3) + (y - 0.5) * (y - 0.5))); });
  auto v = solve_advect_diffuse(up, src, v0, 1e-4, dt, solver);
  double hi = 0.0;
  for (double x : v0.values()) hi = std::max(hi, x);
  for (std::size_t n = 0; n < v.size(); ++n) {
    for (double x : v[n].values()) {
      EXPECT_GE(x, -1e-14);
      EXPECT_LE(x, hi + 1e-14);
    }
    if (n > 0) {
      EXPECT_LE(lp_norm(v[n], 2.0), lp_norm(v[n - 1], 2.0) * (1 + 1e-12));
    }
  }
  auto rep = parabolic_energy_report(up, src, v, 1e-4, solver);
  EXPECT_TRUE(rep.find("max_lhs_over_rhs")->pass);
  // too large a step is refused with the admissible size
  try {
    solve_advect_diffuse(up, src, v0, 1e-4, 4 * dt, solver);
    FAIL() << "expected CflError";
  } catch (const CflError& e) {
    EXPECT_NEAR(e.required_dt(), 0.5 * g.h() / linf_norm(u), 1e-15);
  }
}

TEST(AdvectDiffuse, UpwindMatchesFineReference) {
  // Rotation transport, coarse vs fine grid: L2 histories agree to the
  // first-order upwind error, and both are non-increasing.
  auto run = [](int n, int substeps) {
    Grid g(n);
    PoissonSolver solver(g);
    auto psi = ScalarField::sample(g, [](double x, double y) { return 4 * x * (1 - x) * y * (1 - y); });
    auto u = perp_gradient(psi);
    const double dt = 0.02 / substeps;
    TimeSeries<VectorField> up;
    TimeSeries<ScalarField> src;
    for (int k = 0; k < 25 * substeps; ++k) {
      up.push_back(k * dt, u);
      src.push_back(k * dt, ScalarField(g));
    }
    auto v0 = ScalarField::sample(g, [](double x, double y) { return std::sin(pi * x) * std::sin(2 * pi * y); });
    auto v = solve_advect_diffuse(up, src, v0, 1e-3, dt, solver);
    return lp_norm(v[v.size() - 1], 2.0);
  };
  const double coarse = run(64, 4), fine = run(256, 16);
  EXPECT_NEAR(coarse, fine, 0.05 * fine);
}
