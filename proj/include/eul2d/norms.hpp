#pragma once

// Quadratures and norms on the unit square.
//
// Integrals use the trapezoid rule over the (N+2)^2 nodes including the wall
// ring, so weights are 1 inside, 1/2 on edges and 1/4 at corners and a field
// equal to one integrates to exactly one. Every reduction goes through
// pairwise_sum, which fixes the summation order.

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "eul2d/field.hpp"
#include "eul2d/operators.hpp"

namespace eul2d {

inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 16) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

namespace detail {

inline double ring_weight(int i, int n) { return (i < 0 || i >= n) ? 0.5 : 1.0; }

// h^2 * sum over the padded grid of w(i,j) * f(i,j).
template <typename F>
double trapezoid(const Grid& g, F&& f) {
  const int n = g.n();
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>((n + 2) * (n + 2)));
  for (int j = -1; j <= n; ++j) {
    const double wj = ring_weight(j, n);
    for (int i = -1; i <= n; ++i) terms.push_back(wj * ring_weight(i, n) * f(i, j));
  }
  return g.h() * g.h() * pairwise_sum(terms);
}

inline void check_exponent(double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("norm exponent must satisfy p >= 1");
}

// Derivative arrays of each velocity component, extrapolated to the ring.
struct VelocityGradient {
  ScalarField dx1, dy1, dx2, dy2;
};

inline VelocityGradient velocity_gradient(const VectorField& u) {
  const VectorField g1 = gradient(u.u1());
  const VectorField g2 = gradient(u.u2());
  return {g1.u1(), g1.u2(), g2.u1(), g2.u2()};
}

}  // namespace detail

inline double inner(const ScalarField& a, const ScalarField& b) {
  detail::check_same_grid(a.grid(), b.grid());
  const Padded pa = a.padded();
  const Padded pb = b.padded();
  return detail::trapezoid(a.grid(), [&](int i, int j) { return pa.at(i, j) * pb.at(i, j); });
}

inline double inner(const VectorField& a, const VectorField& b) {
  return inner(a.u1(), b.u1()) + inner(a.u2(), b.u2());
}

// Largest |value| over the interior nodes.
inline double linf_norm(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

inline double linf_norm(const VectorField& u) {
  double m = 0.0;
  for (std::size_t k = 0; k < u.u1().size(); ++k) {
    m = std::max(m, std::hypot(u.u1().values()[k], u.u2().values()[k]));
  }
  return m;
}

inline double lp_norm(const ScalarField& f, double p) {
  if (std::isinf(p) && p > 0) return linf_norm(f);
  detail::check_exponent(p);
  const Padded q = f.padded();
  if (p == 2.0) {
    return std::sqrt(detail::trapezoid(f.grid(), [&](int i, int j) { return q.at(i, j) * q.at(i, j); }));
  }
  const double s = detail::trapezoid(f.grid(), [&](int i, int j) { return std::pow(std::abs(q.at(i, j)), p); });
  return std::pow(s, 1.0 / p);
}

// Pointwise Euclidean magnitude, then the L^p quadrature.
inline double lp_norm(const VectorField& u, double p) {
  if (std::isinf(p) && p > 0) return linf_norm(u);
  detail::check_exponent(p);
  const Padded a = u.u1().padded();
  const Padded b = u.u2().padded();
  auto sq = [&](int i, int j) { return a.at(i, j) * a.at(i, j) + b.at(i, j) * b.at(i, j); };
  if (p == 2.0) return std::sqrt(detail::trapezoid(u.grid(), sq));
  const double s = detail::trapezoid(u.grid(), [&](int i, int j) { return std::pow(sq(i, j), 0.5 * p); });
  return std::pow(s, 1.0 / p);
}

inline double h1_norm(const ScalarField& f) {
  const double l2 = lp_norm(f, 2.0);
  const double g = lp_norm(gradient(f), 2.0);
  return std::sqrt(l2 * l2 + g * g);
}

// (|u|_p^p + |grad u|_p^p)^(1/p) with the Frobenius norm of grad u pointwise.
// At p = 2 this is the H^1 norm and is evaluated without pow, so
// w1p_norm(u, 2) == h1_norm(u) bitwise.
inline double w1p_norm(const VectorField& u, double p) {
  detail::check_exponent(p);
  const auto d = detail::velocity_gradient(u);
  const Padded a = u.u1().padded();
  const Padded b = u.u2().padded();
  const Padded g11 = d.dx1.padded();
  const Padded g12 = d.dy1.padded();
  const Padded g21 = d.dx2.padded();
  const Padded g22 = d.dy2.padded();
  auto usq = [&](int i, int j) { return a.at(i, j) * a.at(i, j) + b.at(i, j) * b.at(i, j); };
  auto gsq = [&](int i, int j) {
    return g11.at(i, j) * g11.at(i, j) + g12.at(i, j) * g12.at(i, j) + g21.at(i, j) * g21.at(i, j) +
           g22.at(i, j) * g22.at(i, j);
  };
  const Grid& g = u.grid();
  if (p == 2.0) {
    return std::sqrt(detail::trapezoid(g, usq) + detail::trapezoid(g, gsq));
  }
  const double su = detail::trapezoid(g, [&](int i, int j) { return std::pow(usq(i, j), 0.5 * p); });
  const double sg = detail::trapezoid(g, [&](int i, int j) { return std::pow(gsq(i, j), 0.5 * p); });
  return std::pow(su + sg, 1.0 / p);
}

inline double h1_norm(const VectorField& u) { return w1p_norm(u, 2.0); }

// L^2 norm of grad u alone.
inline double gradient_l2(const VectorField& u) {
  const auto d = detail::velocity_gradient(u);
  const double a = lp_norm(d.dx1, 2.0), b = lp_norm(d.dy1, 2.0), c = lp_norm(d.dx2, 2.0), e = lp_norm(d.dy2, 2.0);
  return std::sqrt(a * a + b * b + c * c + e * e);
}

}  // namespace eul2d
