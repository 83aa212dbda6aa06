#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "eul2d/field.hpp"
#include "eul2d/field_io.hpp"
#include "eul2d/norms.hpp"
#include "eul2d/operators.hpp"
#include "eul2d/time_norm.hpp"

using namespace eul2d;
using std::numbers::pi;

namespace {

ScalarField random_dirichlet(const Grid& g, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  ScalarField f(g);
  for (double& v : f.values()) v = d(gen);
  return f;
}

double sinsin(double x, double y) { return std::sin(pi * x) * std::sin(pi * y); }

// max-norm error of curl(perp_gradient(psi)) against 2 pi^2 psi
double curl_error(int n) {
  Grid g(n);
  auto psi = ScalarField::sample(g, sinsin);
  auto c = curl(perp_gradient(psi));
  double e = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) e = std::max(e, std::abs(c(i, j) - 2 * pi * pi * psi(i, j)));
  return e;
}

}  // namespace

TEST(Grid, RejectsSmallAndInexactSizes) {
  EXPECT_THROW(Grid(7), std::invalid_argument);
  EXPECT_NO_THROW(Grid(8));
  EXPECT_NO_THROW(Grid(64));
  EXPECT_NO_THROW(Grid(128));
  // 1/49 * 49 rounds to 1 - 2^-53
  EXPECT_NE(1.0 / 49.0 * 49.0, 1.0);
  EXPECT_THROW(Grid(48), std::invalid_argument);
}

TEST(Grid, SpacingAndCoordinates) {
  Grid g(63);
  EXPECT_EQ(g.h(), 1.0 / 64.0);
  EXPECT_EQ(g.coord(-1), 0.0);
  EXPECT_EQ(g.coord(63), 1.0);
  EXPECT_EQ(g.index(2, 3), 3u * 63u + 2u);
}

TEST(ScalarField, ArithmeticChecksCompatibility) {
  Grid a(16), b(32);
  ScalarField fa(a), fb(b);
  EXPECT_THROW(fa += fb, std::invalid_argument);
  ScalarField free_field(a, Extension::free());
  EXPECT_THROW(fa += free_field, std::invalid_argument);
  EXPECT_THROW(ScalarField(a, std::vector<double>(10)), std::invalid_argument);
}

TEST(Padded, QuadraticExtrapolationIsExactForQuadratics) {
  Grid g(16);
  auto f = ScalarField::sample(g, [](double x, double y) { return 1 + 2 * x - 3 * x * x + y * y; }, Extension::free());
  Padded p = f.padded();
  EXPECT_NEAR(p.at(-1, 4), 1 + 0 - 0 + g.coord(4) * g.coord(4), 1e-12);
  EXPECT_NEAR(p.at(16, 16), 1 + 2 - 3 + 1, 1e-12);
}

TEST(Curl, RigidRotationIsTwo) {
  Grid g(32);
  auto u = VectorField::sample(g, [](double x, double y) { return std::pair{-y, x}; });
  auto c = curl(u);
  for (double v : c.values()) EXPECT_NEAR(v, 2.0, 1e-12);
}

TEST(Curl, ConstantFieldIsZero) {
  Grid g(16);
  auto u = VectorField::sample(g, [](double, double) { return std::pair{0.7, -1.3}; });
  for (double v : curl(u).values()) EXPECT_EQ(v, 0.0);
}

TEST(Curl, PerpGradientOfEigenfunction) {
  EXPECT_LT(curl_error(64), 0.02);
  const double ratio = curl_error(63) / curl_error(127);
  EXPECT_GE(ratio, 3.5);
  EXPECT_LE(ratio, 4.5);
}

TEST(PerpGradient, MatchesClosedForm) {
  Grid g(64);
  auto u = perp_gradient(ScalarField::sample(g, sinsin));
  double e = 0.0;
  for (int j = 0; j < 64; ++j) {
    for (int i = 0; i < 64; ++i) {
      const double x = g.coord(i), y = g.coord(j);
      e = std::max(e, std::abs(u.u1()(i, j) - pi * std::sin(pi * x) * std::cos(pi * y)));
      e = std::max(e, std::abs(u.u2()(i, j) + pi * std::cos(pi * x) * std::sin(pi * y)));
    }
  }
  EXPECT_LT(e, pi * pi * pi * g.h() * g.h());
  EXPECT_TRUE(u.tangent());
  ASSERT_NE(u.stream(), nullptr);
}

TEST(PerpGradient, ZeroAndDivergenceFree) {
  Grid g(32);
  for (double v : perp_gradient(ScalarField(g)).u1().values()) EXPECT_EQ(v, 0.0);
  auto psi = random_dirichlet(g, 3);
  auto u = perp_gradient(psi);
  EXPECT_LE(linf_norm(divergence(u)), 1e-10 * 32 * linf_norm(u) / g.h());
  EXPECT_THROW(perp_gradient(ScalarField(g, Extension::free())), std::invalid_argument);
}

TEST(Laplacian, EigenfunctionAndConsistency) {
  Grid g(64);
  auto psi = ScalarField::sample(g, sinsin);
  auto lap = laplacian(psi);
  // the 5-point stencil scales the eigenvalue by sinc factors exactly
  const double lambda_h = 8.0 / (g.h() * g.h()) * std::pow(std::sin(0.5 * pi * g.h()), 2);
  for (int k = 0; k < 64 * 64; k += 97) EXPECT_NEAR(lap.values()[k], -lambda_h * psi.values()[k], 1e-9);
  EXPECT_NEAR(lambda_h, 2 * pi * pi, 2 * pi * pi * pi * pi * g.h() * g.h() / 6.0);
}

TEST(Divergence, ConstantIsZero) {
  Grid g(16);
  auto u = VectorField::sample(g, [](double, double) { return std::pair{3.0, 4.0}; });
  for (double v : divergence(u).values()) EXPECT_EQ(v, 0.0);
}

TEST(Gradient, SymmetricProfileAtMidline) {
  Grid g(9);  // node 4 sits on x = 1/2
  ASSERT_EQ(g.coord(4), 0.5);
  auto f = ScalarField::sample(g, [](double x, double) { return x * (1 - x); });
  auto gr = gradient(f);
  for (int j = 0; j < 9; ++j) EXPECT_NEAR(gr.u1()(4, j), 0.0, 1e-14);
  EXPECT_NEAR(gr.u1()(3, 4), -gr.u1()(5, 4), 1e-14);
}

TEST(Advect, TrivialCases) {
  Grid g(16);
  auto theta = random_dirichlet(g, 1);
  VectorField zero_u = perp_gradient(ScalarField(g));
  for (auto s : {AdvectionScheme::arakawa, AdvectionScheme::upwind}) {
    for (double v : advect(zero_u, theta, s).values()) EXPECT_EQ(v, 0.0);
  }
  auto u = perp_gradient(random_dirichlet(g, 2));
  ScalarField c = ScalarField::sample(g, [](double, double) { return 2.5; }, Extension::free());
  for (auto s : {AdvectionScheme::arakawa, AdvectionScheme::upwind}) {
    for (double v : advect(u, c, s).values()) EXPECT_NEAR(v, 0.0, 1e-10);
  }
  EXPECT_THROW(parse_advection("centered"), std::invalid_argument);
  EXPECT_THROW(advect(VectorField(g, true), theta, AdvectionScheme::arakawa), std::invalid_argument);
}

TEST(Advect, ArakawaSkewSymmetryByDirectSummation) {
  Grid g(32);
  auto u = perp_gradient(random_dirichlet(g, 11));
  auto theta = random_dirichlet(g, 12);
  auto phi = random_dirichlet(g, 13);
  auto a = advect(u, theta, AdvectionScheme::arakawa);
  auto b = advect(u, phi, AdvectionScheme::arakawa);
  // plain node sums; ring values are zero for Dirichlet fields
  long double s_tt = 0, s_tp = 0, s_pt = 0, s_norm = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    s_tt += static_cast<long double>(a.values()[k]) * theta.values()[k];
    s_tp += static_cast<long double>(a.values()[k]) * phi.values()[k];
    s_pt += static_cast<long double>(b.values()[k]) * theta.values()[k];
    s_norm += static_cast<long double>(theta.values()[k]) * theta.values()[k];
  }
  const double h2 = g.h() * g.h();
  EXPECT_LE(std::abs(static_cast<double>(s_tt) * h2), 1e-12 * static_cast<double>(s_norm) * h2 * linf_norm(u) / g.h());
  EXPECT_LE(std::abs(static_cast<double>(s_tp + s_pt)), 1e-12 * static_cast<double>(std::abs(s_tp) + 1));
  // the library inner product agrees with the direct sum
  EXPECT_NEAR(inner(a, theta), static_cast<double>(s_tt) * h2, 1e-12);
}

TEST(Advect, UpwindStepIsMonotone) {
  Grid g(16);
  auto u = perp_gradient(random_dirichlet(g, 5));
  ScalarField theta = random_dirichlet(g, 6);
  const double dt = 0.9 * g.h() / (2 * linf_norm(u));
  ScalarField next = theta;
  next.axpy(-dt, advect(u, theta, AdvectionScheme::upwind));
  double lo = 0, hi = 0;
  for (double v : theta.values()) lo = std::min(lo, v), hi = std::max(hi, v);
  for (double v : next.values()) {
    EXPECT_GE(v, lo - 1e-14);
    EXPECT_LE(v, hi + 1e-14);
  }
}

TEST(Norms, ClosedFormValues) {
  Grid g(32);
  auto one = ScalarField::sample(g, [](double, double) { return 1.0; }, Extension::free());
  EXPECT_NEAR(lp_norm(one, 2.0), 1.0, 1e-14);
  EXPECT_NEAR(lp_norm(one, 3.5), 1.0, 1e-14);
  auto s = ScalarField::sample(g, sinsin);
  EXPECT_NEAR(lp_norm(s, 2.0), 0.5, 1e-14);  // trapezoid is exact for trig polynomials
  ScalarField z(g);
  for (double p : {1.0, 2.0, 7.0, std::numeric_limits<double>::infinity()}) EXPECT_EQ(lp_norm(z, p), 0.0);
  EXPECT_EQ(h1_norm(z), 0.0);
  EXPECT_THROW(lp_norm(s, 0.5), std::invalid_argument);
  EXPECT_EQ(lp_norm(s, std::numeric_limits<double>::infinity()), linf_norm(s));
}

TEST(Norms, MonotoneAndH1Dominates) {
  Grid g(32);
  auto f = random_dirichlet(g, 21);
  ScalarField bigger = f;
  for (double& v : bigger.values()) v = 1.5 * std::abs(v) + 0.1;
  for (double p : {1.0, 2.0, 4.0}) EXPECT_LE(lp_norm(f, p), lp_norm(bigger, p));
  EXPECT_GE(h1_norm(f), lp_norm(f, 2.0));
  auto u = perp_gradient(f);
  EXPECT_EQ(w1p_norm(u, 2.0), h1_norm(u));
  EXPECT_GE(w1p_norm(u, 4.0), 0.0);
}

TEST(Norms, SecondOrderH1) {
  auto err = [](int n) {
    Grid g(n);
    auto f = ScalarField::sample(g, sinsin);
    // |f|^2 + |grad f|^2 = 1/4 + 2 pi^2 / 4
    return std::abs(h1_norm(f) - std::sqrt(0.25 + 0.5 * pi * pi));
  };
  const double r = err(63) / err(127);
  EXPECT_GE(r, 3.5);
  EXPECT_LE(r, 4.5);
}

TEST(FractionalNorm, ConstantAndZeroSeries) {
  TimeSeries<double> c, z;
  for (int k = 0; k <= 20; ++k) {
    c.push_back(0.1 * k, 3.0);
    z.push_back(0.1 * k, 0.0);
  }
  EXPECT_NEAR(std::pow(fractional_time_norm(c, 0.3, 2.0), 2.0), 2.0 * 9.0, 1e-12);
  EXPECT_EQ(fractional_time_norm(z, 0.3, 2.0), 0.0);
  // first term scales as T^(1/p)
  TimeSeries<double> c2;
  for (int k = 0; k <= 40; ++k) c2.push_back(0.1 * k, 3.0);
  EXPECT_NEAR(fractional_time_norm(c2, 0.3, 3.0) / fractional_time_norm(c, 0.3, 3.0), std::pow(2.0, 1.0 / 3.0), 1e-12);
}

TEST(FractionalNorm, RejectsBadArguments) {
  TimeSeries<double> s;
  s.push_back(0, 0);
  s.push_back(1, 1);
  EXPECT_THROW(fractional_time_norm(s, 0.25, 2.0), std::invalid_argument);
  s.push_back(2, 2);
  EXPECT_THROW(fractional_time_norm(s, 1.0, 2.0), std::invalid_argument);
  EXPECT_THROW(fractional_time_norm(s, 0.25, 1.0), std::invalid_argument);
  EXPECT_THROW(s.push_back(2, 3), std::invalid_argument);
}

TEST(FractionalNorm, LinearPathAgainstQuadratureOracle) {
  // Oracle: int int |t-s|^(1/2) on [0,1]^2 by Gauss-Legendre on each triangle
  // after the substitution tau = t - s, integrating 2 (1 - tau) tau^(1/2).
  const double nodes[] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
                          0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
  const double weights[] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                            0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
  double oracle = 0.0;
  for (int q = 0; q < 8; ++q) {
    // tau = r^2 removes the square-root singularity of the derivative
    const double r = 0.5 * (nodes[q] + 1.0);
    const double tau = r * r;
    oracle += 0.5 * weights[q] * 2.0 * (1.0 - tau) * r * 2.0 * r;
  }
  EXPECT_NEAR(oracle, 8.0 / 15.0, 1e-12);

  TimeSeries<double> s;
  const int m = 2048;
  for (int k = 0; k <= m; ++k) s.push_back(static_cast<double>(k) / m, static_cast<double>(k) / m);
  const double target = 1.0 / 3.0 + oracle;
  const double got = std::pow(fractional_time_norm(s, 0.25, 2.0, DiagonalRule::extrapolate), 2.0);
  EXPECT_NEAR(got, target, 1e-4 * target);
  const double raw = std::pow(fractional_time_norm(s, 0.25, 2.0), 2.0);
  EXPECT_LT(raw, got);
}

TEST(FractionalNorm, FieldSeries) {
  Grid g(16);
  TimeSeries<ScalarField> s;
  auto f = ScalarField::sample(g, sinsin);
  for (int k = 0; k <= 10; ++k) s.push_back(0.1 * k, f);
  EXPECT_NEAR(fractional_time_norm(s, 0.2, 2.0, SpatialNorm::l2), 0.5, 1e-12);
}

TEST(FieldIo, BitExactRoundTrip) {
  Grid g(16);
  std::mt19937_64 gen(9);
  std::normal_distribution<double> d;
  ScalarField f(g);
  for (double& v : f.values()) v = d(gen) * std::exp(d(gen) * 20);
  f(0, 0) = -0.0;
  VectorField u(random_dirichlet(g, 1), random_dirichlet(g, 2), true);
  for (auto enc : {FieldEncoding::binary, FieldEncoding::csv}) {
    auto back = std::get<ScalarField>(decode_field(encode_field(f, enc)));
    ASSERT_EQ(back.size(), f.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
      EXPECT_EQ(std::bit_cast<std::uint64_t>(back.values()[k]), std::bit_cast<std::uint64_t>(f.values()[k]));
    }
    auto vb = std::get<VectorField>(decode_field(encode_field(u, enc)));
    EXPECT_TRUE(vb.u1() == u.u1());
    EXPECT_TRUE(vb.u2() == u.u2());
  }
  EXPECT_EQ(encode_field(f, FieldEncoding::csv).substr(0, 32), "EUL2D v1 scalar N=16 h=0.0588235");
}

TEST(FieldIo, FilesAndErrors) {
  Grid g(8);
  auto f = random_dirichlet(g, 4);
  const auto path = (std::filesystem::temp_directory_path() / "eul2d_field_io_test.fld").string();
  write_field(path, f, FieldEncoding::binary);
  EXPECT_TRUE(read_scalar_field(path) == f);
  std::filesystem::remove(path);
  EXPECT_THROW(decode_field("EUL2D v2 scalar N=8 h=0.1111111111111111\n"), FieldFormatError);
  EXPECT_THROW(decode_field("EUL2D v1 scalar N=8 h=0.5\n"), FieldFormatError);
  EXPECT_THROW(decode_field("EUL2D v1 scalar N=8 h=0.1111111111111111\n1,2,3\n"), FieldFormatError);
  EXPECT_THROW(read_field("/nonexistent/dir/x.fld"), IoError);
}
