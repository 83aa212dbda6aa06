#pragma once

// Noise structures.
//
// Additive: W(t,x) = sum_m sigma_m phi_m(x) beta_m(t) with phi_m = perp-grad of
// psi_m = sin(k pi x) sin(l pi y). Each phi_m is divergence-free and tangent
// to the walls, and curl phi_m = (k^2+l^2) pi^2 psi_m vanishes on the walls.
//
// Multiplicative: G(u) dW = sum_i c^i(x) u dbeta_i with
// c^i = a_i cos(f_i pi x) cos(f_i pi y). The constants
//   lambda0 = sum a_i^2,  lambda1 = 2 sum a_i^2,  lambda2 = 2 sum (a_i f_i pi)^2
// dominate sum |c^i|_inf^2, 2 sum |c^i|_inf^2 and 2 sum |grad c^i|_inf^2.

#include <chrono>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "eul2d/elliptic.hpp"
#include "eul2d/field.hpp"
#include "eul2d/norms.hpp"
#include "eul2d/operators.hpp"
#include "eul2d/parallel.hpp"
#include "eul2d/report.hpp"
#include "eul2d/rng.hpp"
#include "eul2d/sine_series.hpp"
#include "eul2d/time_norm.hpp"

namespace eul2d {

struct AdditiveMode {
  int k = 1;
  int l = 1;
  double sigma = 0.0;

  double eigenvalue() const { return std::numbers::pi * std::numbers::pi * static_cast<double>(k * k + l * l); }
  bool operator==(const AdditiveMode&) const = default;
};

struct AdditiveIncrement {
  VectorField dW;
  ScalarField dcurl;
};

namespace detail {

inline void check_increment_count(std::size_t got, std::size_t want) {
  if (got != want) {
    throw std::invalid_argument("noise increment count " + std::to_string(got) + " does not match " +
                                std::to_string(want) + " modes");
  }
}

}  // namespace detail

class AdditiveNoise {
 public:
  AdditiveNoise() = default;
  explicit AdditiveNoise(std::vector<AdditiveMode> modes) : modes_(std::move(modes)) {
    for (const auto& m : modes_) {
      if (m.k < 1 || m.l < 1) throw std::invalid_argument("additive noise wavenumbers must be >= 1");
      if (!(m.sigma >= 0.0) || !std::isfinite(m.sigma)) {
        throw std::invalid_argument("additive noise amplitudes must be finite and >= 0");
      }
    }
  }

  // Modes (k, l) in {1..kmax}^2 with sigma = sigma0 (k^2 + l^2)^-3.
  static AdditiveNoise standard(double sigma0, int kmax = 4) {
    std::vector<AdditiveMode> modes;
    for (int k = 1; k <= kmax; ++k) {
      for (int l = 1; l <= kmax; ++l) modes.push_back({k, l, sigma0 * std::pow(static_cast<double>(k * k + l * l), -3.0)});
    }
    return AdditiveNoise(std::move(modes));
  }

  const std::vector<AdditiveMode>& modes() const { return modes_; }
  std::size_t size() const { return modes_.size(); }

  // sum sigma^2 (k^2+l^2)^4, the finite-mode stand-in for H^4 regularity.
  double regularity_sum() const {
    double s = 0.0;
    for (const auto& m : modes_) s += m.sigma * m.sigma * std::pow(static_cast<double>(m.k * m.k + m.l * m.l), 4.0);
    return s;
  }

  // sum_m sigma_m c_m psi_m as a sine series.
  SineSeries stream(std::span<const double> c) const {
    detail::check_increment_count(c.size(), modes_.size());
    std::vector<SineTerm> terms;
    for (std::size_t m = 0; m < modes_.size(); ++m) terms.push_back({modes_[m].sigma * c[m], modes_[m].k, modes_[m].l});
    return SineSeries(std::move(terms));
  }

  AdditiveIncrement increment(const Grid& g, std::span<const double> dbeta) const {
    const SineSeries s = stream(dbeta);
    return {perp_gradient(s.sample(g)), s.negative_laplacian().sample(g)};
  }

  // curl W for mode amplitudes W_m(t).
  ScalarField curl(const Grid& g, std::span<const double> w) const { return stream(w).negative_laplacian().sample(g); }

  bool operator==(const AdditiveNoise&) const = default;

 private:
  std::vector<AdditiveMode> modes_;
};

// Sampled sigma_m curl(phi_m), reused across steps.
class AdditiveBasis {
 public:
  AdditiveBasis(const Grid& g, const AdditiveNoise& noise) {
    for (const auto& m : noise.modes()) {
      curl_.push_back(SineSeries::mode(m.k, m.l, m.sigma * m.eigenvalue()).sample(g));
    }
  }
  std::size_t size() const { return curl_.size(); }
  const ScalarField& curl_mode(std::size_t m) const { return curl_[m]; }

  ScalarField curl(const Grid& g, std::span<const double> w) const {
    detail::check_increment_count(w.size(), curl_.size());
    ScalarField out(g);
    for (std::size_t m = 0; m < curl_.size(); ++m) {
      if (w[m] != 0.0) out.axpy(w[m], curl_[m]);
    }
    return out;
  }

 private:
  std::vector<ScalarField> curl_;
};

struct NoiseCoefficient {
  int freq = 0;
  double amp = 0.0;

  double value(double x, double y) const { return amp * cx(x) * cx(y); }
  double dx(double x, double y) const { return -amp * freq * std::numbers::pi * sx(x) * cx(y); }
  double dy(double x, double y) const { return -amp * freq * std::numbers::pi * cx(x) * sx(y); }
  double sup() const { return std::abs(amp); }
  double grad_sup() const { return std::abs(amp) * freq * std::numbers::pi; }

  bool operator==(const NoiseCoefficient&) const = default;

 private:
  double cx(double x) const { return std::cos(freq * std::numbers::pi * x); }
  double sx(double x) const { return std::sin(freq * std::numbers::pi * x); }
};

class MultiplicativeNoise {
 public:
  MultiplicativeNoise() = default;
  explicit MultiplicativeNoise(std::vector<NoiseCoefficient> coeffs) : coeffs_(std::move(coeffs)) {
    for (const auto& c : coeffs_) {
      if (c.freq < 0) throw std::invalid_argument("coefficient frequency must be >= 0");
      if (!std::isfinite(c.amp)) throw std::invalid_argument("coefficient amplitude must be finite");
    }
  }

  // c^i = cos(i pi x) cos(i pi y) / i^2, i = 1..count.
  static MultiplicativeNoise standard(int count = 4) {
    std::vector<NoiseCoefficient> c;
    for (int i = 1; i <= count; ++i) c.push_back({i, 1.0 / static_cast<double>(i * i)});
    return MultiplicativeNoise(std::move(c));
  }

  const std::vector<NoiseCoefficient>& coefficients() const { return coeffs_; }
  std::size_t size() const { return coeffs_.size(); }

  double lambda0() const {
    double s = 0.0;
    for (const auto& c : coeffs_) s += c.sup() * c.sup();
    return s;
  }
  double lambda1() const { return 2.0 * lambda0(); }
  double lambda2() const {
    double s = 0.0;
    for (const auto& c : coeffs_) s += c.grad_sup() * c.grad_sup();
    return 2.0 * s;
  }

  bool operator==(const MultiplicativeNoise&) const = default;

 private:
  std::vector<NoiseCoefficient> coeffs_;
};

// Coefficients and their gradients sampled at the interior nodes.
class MultiplicativeBasis {
 public:
  MultiplicativeBasis(const Grid& g, const MultiplicativeNoise& noise) {
    for (const auto& c : noise.coefficients()) {
      active_.push_back(c.amp != 0.0);
      c_.push_back(ScalarField::sample(g, [&](double x, double y) { return c.value(x, y); }));
      cx_.push_back(ScalarField::sample(g, [&](double x, double y) { return c.dx(x, y); }));
      cy_.push_back(ScalarField::sample(g, [&](double x, double y) { return c.dy(x, y); }));
    }
  }
  std::size_t size() const { return c_.size(); }

  // sum_i c^i u dbeta_i, componentwise.
  VectorField increment(const VectorField& u, std::span<const double> dbeta) const {
    detail::check_increment_count(dbeta.size(), c_.size());
    VectorField out(u.grid(), u.tangent());
    for (std::size_t i = 0; i < c_.size(); ++i) {
      if (!active_[i]) continue;
      const auto c = c_[i].values();
      const auto a = u.u1().values();
      const auto b = u.u2().values();
      auto o1 = out.u1().values();
      auto o2 = out.u2().values();
      for (std::size_t q = 0; q < c.size(); ++q) {
        o1[q] += c[q] * a[q] * dbeta[i];
        o2[q] += c[q] * b[q] * dbeta[i];
      }
    }
    return out;
  }

  // sum_i curl(c^i u) dbeta_i = sum_i (c^i beta + grad c^i ^ u) dbeta_i.
  ScalarField curl_increment(const ScalarField& beta, const VectorField& u, std::span<const double> dbeta) const {
    detail::check_increment_count(dbeta.size(), c_.size());
    ScalarField out(beta.grid());
    auto o = out.values();
    const auto b = beta.values();
    const auto u1 = u.u1().values();
    const auto u2 = u.u2().values();
    for (std::size_t i = 0; i < c_.size(); ++i) {
      if (!active_[i]) continue;
      const auto c = c_[i].values();
      const auto gx = cx_[i].values();
      const auto gy = cy_[i].values();
      for (std::size_t q = 0; q < o.size(); ++q) o[q] += (c[q] * b[q] + gx[q] * u2[q] - gy[q] * u1[q]) * dbeta[i];
    }
    return out;
  }

  bool any_active() const {
    for (bool a : active_) {
      if (a) return true;
    }
    return false;
  }

 private:
  std::vector<bool> active_;
  std::vector<ScalarField> c_, cx_, cy_;
};

inline AdditiveIncrement additive_increment(const AdditiveNoise& noise, const Grid& g, std::span<const double> dbeta) {
  return noise.increment(g, dbeta);
}

inline VectorField multiplicative_increment(const MultiplicativeNoise& noise, const VectorField& u,
                                            std::span<const double> dbeta) {
  return MultiplicativeBasis(u.grid(), noise).increment(u, dbeta);
}

namespace detail {

// Random divergence-free test velocity from band-limited vorticity.
inline VectorField random_test_velocity(const PoissonSolver& solver, RngStream& rng, int kmax) {
  std::vector<SineTerm> terms;
  for (int k = 1; k <= kmax; ++k) {
    for (int l = 1; l <= kmax; ++l) terms.push_back({rng.normal() / std::sqrt(static_cast<double>(k * k + l * l)), k, l});
  }
  return recover_velocity(SineSeries(std::move(terms)).sample(solver.grid()), solver);
}

}  // namespace detail

// Both structural inequalities on random test fields:
//   sum_i |c^i u|^2 <= lambda0 |u|^2
//   sum_i |curl(c^i u)|^2 <= lambda1 |curl u|^2 + lambda2 |u|^2
// Products are formed node by node on the padded grid with c^i evaluated
// exactly at wall nodes, so the pointwise inequalities carry over to the
// quadrature. A relative slack of 1e-12 absorbs rounding in equality cases.
inline EstimateReport verify_g1(const MultiplicativeNoise& noise, const Grid& g, int trials, std::uint64_t seed = 1) {
  if (trials < 1) throw std::invalid_argument("verify_g1 needs at least one trial");
  const auto start = std::chrono::steady_clock::now();
  EstimateReport r("g1-check");
  r.input("N", static_cast<double>(g.n()));
  r.input("trials", static_cast<double>(trials));
  r.input("coefficients", static_cast<double>(noise.size()));
  r.input("seed", std::to_string(seed));
  const double slack = 1e-12;
  r.input("rounding_slack", slack);
  const double l0 = noise.lambda0(), l1 = noise.lambda1(), l2 = noise.lambda2();
  r.measure("lambda0", l0);
  r.measure("lambda1", l1);
  r.measure("lambda2", l2);

  const int n = g.n();
  // coefficient values on the padded grid
  std::vector<std::vector<double>> cv, cxv, cyv;
  for (const auto& c : noise.coefficients()) {
    std::vector<double> a, b, d;
    for (int j = -1; j <= n; ++j) {
      for (int i = -1; i <= n; ++i) {
        a.push_back(c.value(g.coord(i), g.coord(j)));
        b.push_back(c.dx(g.coord(i), g.coord(j)));
        d.push_back(c.dy(g.coord(i), g.coord(j)));
      }
    }
    cv.push_back(std::move(a));
    cxv.push_back(std::move(b));
    cyv.push_back(std::move(d));
  }
  auto slot = [n](int i, int j) { return static_cast<std::size_t>((j + 1) * (n + 2) + i + 1); };

  PoissonSolver solver(g);
  RngStream rng(seed, 0);
  double worst_l2 = 1.0, worst_curl = 1.0;
  bool ok_l2 = true, ok_curl = true;
  for (int t = 0; t < trials; ++t) {
    const VectorField u = detail::random_test_velocity(solver, rng, 6);
    const ScalarField beta = curl(u);
    const Padded p1 = u.u1().padded(), p2 = u.u2().padded(), pb = beta.padded();
    auto usq = [&](int i, int j) { return p1.at(i, j) * p1.at(i, j) + p2.at(i, j) * p2.at(i, j); };
    const double lhs1 = detail::trapezoid(g, [&](int i, int j) {
      double s = 0.0;
      for (const auto& c : cv) s += c[slot(i, j)] * c[slot(i, j)] * usq(i, j);
      return s;
    });
    const double u2 = detail::trapezoid(g, usq);
    const double lhs2 = detail::trapezoid(g, [&](int i, int j) {
      double s = 0.0;
      for (std::size_t k = 0; k < cv.size(); ++k) {
        const double v = cv[k][slot(i, j)] * pb.at(i, j) + cxv[k][slot(i, j)] * p2.at(i, j) - cyv[k][slot(i, j)] * p1.at(i, j);
        s += v * v;
      }
      return s;
    });
    const double b2 = detail::trapezoid(g, [&](int i, int j) { return pb.at(i, j) * pb.at(i, j); });
    const double rhs1 = l0 * u2, rhs2 = l1 * b2 + l2 * u2;
    ok_l2 = ok_l2 && lhs1 <= rhs1 * (1.0 + slack);
    ok_curl = ok_curl && lhs2 <= rhs2 * (1.0 + slack);
    if (rhs1 > 0.0) worst_l2 = std::min(worst_l2, (rhs1 - lhs1) / rhs1);
    if (rhs2 > 0.0) worst_curl = std::min(worst_curl, (rhs2 - lhs2) / rhs2);
    if (rhs1 == 0.0 && lhs1 != 0.0) ok_l2 = false;
    if (rhs2 == 0.0 && lhs2 != 0.0) ok_curl = false;
  }
  r.check("min_relative_margin_l2", worst_l2, -slack, Sense::at_least);
  r.check("min_relative_margin_curl", worst_curl, -slack, Sense::at_least);
  r.require("all_trials_l2", ok_l2);
  r.require("all_trials_curl", ok_curl);
  r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

// E |W|^p, E |W(t)-W(s)|^p moments: m_p = 2^(p/2) Gamma((p+1)/2) / sqrt(pi).
// Expected fractional norm^p of f W on [0, T]:
//   |f|^p m_p ( T^(a+1)/(a+1) + 2 T^(b+2) / ((b+1)(b+2)) ),  a = p/2, b = p/2 - 1 - gamma p.
inline double ito_fractional_target(double gamma, double p, double T, double f) {
  const double mp = std::pow(2.0, 0.5 * p) * boost::math::tgamma(0.5 * (p + 1.0)) / std::sqrt(std::numbers::pi);
  const double a = 0.5 * p, b = 0.5 * p - 1.0 - gamma * p;
  return std::pow(std::abs(f), p) * mp * (std::pow(T, a + 1.0) / (a + 1.0) + 2.0 * std::pow(T, b + 2.0) / ((b + 1.0) * (b + 2.0)));
}

struct ItoCheckParams {
  double gamma = 0.25;
  double p = 2.0;
  std::size_t paths = 10000;
  std::size_t time_points = 512;
  double T = 1.0;
  double integrand = 1.0;  // constant f, so I(f)(t) = f W(t)
  double tolerance = 0.05;
  std::uint64_t seed = 1;
  int threads = 1;
};

// Monte-Carlo estimate of E |I(f)|^p in W^{gamma,p}(0,T) against the closed form.
inline EstimateReport ito_integral_fractional_check(const ItoCheckParams& q) {
  if (!(q.gamma > 0.0 && q.gamma < 0.5)) throw std::invalid_argument("ito check needs gamma in (0, 1/2)");
  if (!(q.p >= 2.0)) throw std::invalid_argument("ito check needs p >= 2");
  if (q.paths < 2) throw std::invalid_argument("ito check needs at least 2 paths");
  if (q.time_points < 3) throw std::invalid_argument("ito check needs at least 3 time points");
  const auto start = std::chrono::steady_clock::now();
  EstimateReport r("ito-check");
  r.input("gamma", q.gamma);
  r.input("p", q.p);
  r.input("paths", static_cast<double>(q.paths));
  r.input("time_points", static_cast<double>(q.time_points));
  r.input("T", q.T);
  r.input("integrand", q.integrand);
  r.input("seed", std::to_string(q.seed));

  const double dt = q.T / static_cast<double>(q.time_points - 1);
  const auto parts = parallel_map(q.paths, q.threads, [&](std::size_t path) {
    RngStream rng(q.seed, stream_id(path, 0));
    const auto w = sample_brownian_path(rng, q.T, dt);
    return fractional_time_norm_parts(
        w, q.gamma, q.p, [f = q.integrand](double v) { return std::abs(f * v); }, DiagonalRule::exclude);
  });
  std::vector<double> power(parts.size()), b1(parts.size()), b2(parts.size());
  for (std::size_t k = 0; k < parts.size(); ++k) {
    power[k] = parts[k].power();
    b1[k] = parts[k].band1;
    b2[k] = parts[k].band2;
  }
  const double m = static_cast<double>(parts.size());
  const double raw = pairwise_sum(power) / m;
  const double correction = diagonal_band_correction(pairwise_sum(b1) / m, pairwise_sum(b2) / m, dt);
  double var = 0.0;
  for (double v : power) var += (v - raw) * (v - raw);
  var /= (m - 1.0);
  const double estimate = raw + correction;
  const double target = ito_fractional_target(q.gamma, q.p, q.T, q.integrand);

  r.measure("estimate_raw", raw);
  r.measure("diagonal_correction", correction);
  r.measure("estimate", estimate);
  r.measure("standard_error", std::sqrt(var / m));
  r.measure("target", target);
  const double err = std::abs(estimate - target);
  r.measure("relative_error", target > 0.0 ? err / target : err);
  r.check("abs_error", err, q.tolerance * target, Sense::at_most);
  r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace eul2d
