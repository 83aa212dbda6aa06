#pragma once

// Second-order grid operators. All stencils act on Padded arrays, so the
// boundary treatment is decided entirely by each field's Extension.

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

#include "eul2d/field.hpp"

namespace eul2d {

enum class AdvectionScheme { arakawa, upwind };

inline AdvectionScheme parse_advection(std::string_view name) {
  if (name == "arakawa") return AdvectionScheme::arakawa;
  if (name == "upwind") return AdvectionScheme::upwind;
  throw std::invalid_argument("unknown advection scheme '" + std::string(name) + "'");
}

inline std::string to_string(AdvectionScheme s) { return s == AdvectionScheme::arakawa ? "arakawa" : "upwind"; }

namespace detail {

inline void check_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw std::invalid_argument("grid mismatch");
}

}  // namespace detail

inline VectorField gradient(const ScalarField& psi) {
  const Grid& g = psi.grid();
  const Padded p = psi.padded();
  const double inv2h = 0.5 / g.h();
  VectorField out(g, false);
  for (int j = 0; j < g.n(); ++j) {
    for (int i = 0; i < g.n(); ++i) {
      out.u1()(i, j) = (p.at(i + 1, j) - p.at(i - 1, j)) * inv2h;
      out.u2()(i, j) = (p.at(i, j + 1) - p.at(i, j - 1)) * inv2h;
    }
  }
  return out;
}

// u = (d psi/dy, -d psi/dx). Central differences of a zero-extended psi
// commute, so divergence(perp_gradient(psi)) vanishes to round-off.
inline VectorField perp_gradient(const ScalarField& psi) {
  if (!(psi.extension() == Extension::dirichlet())) {
    throw std::invalid_argument("perp_gradient needs a streamfunction with zero Dirichlet data");
  }
  const Grid& g = psi.grid();
  const Padded p = psi.padded();
  const double inv2h = 0.5 / g.h();
  VectorField out(g, true);
  for (int j = 0; j < g.n(); ++j) {
    for (int i = 0; i < g.n(); ++i) {
      out.u1()(i, j) = (p.at(i, j + 1) - p.at(i, j - 1)) * inv2h;
      out.u2()(i, j) = -(p.at(i + 1, j) - p.at(i - 1, j)) * inv2h;
    }
  }
  out.set_stream(std::make_shared<const ScalarField>(psi));
  return out;
}

inline ScalarField divergence(const VectorField& u) {
  const Grid& g = u.grid();
  const Padded p1 = u.u1().padded();
  const Padded p2 = u.u2().padded();
  const double inv2h = 0.5 / g.h();
  ScalarField out(g, Extension::free());
  for (int j = 0; j < g.n(); ++j) {
    for (int i = 0; i < g.n(); ++i) {
      out(i, j) = (p1.at(i + 1, j) - p1.at(i - 1, j)) * inv2h + (p2.at(i, j + 1) - p2.at(i, j - 1)) * inv2h;
    }
  }
  return out;
}

// du2/dx - du1/dy; tangential components use one-sided differences at the walls.
inline ScalarField curl(const VectorField& u) {
  const Grid& g = u.grid();
  const Padded p1 = u.u1().padded();
  const Padded p2 = u.u2().padded();
  const double inv2h = 0.5 / g.h();
  ScalarField out(g, Extension::free());
  for (int j = 0; j < g.n(); ++j) {
    for (int i = 0; i < g.n(); ++i) {
      out(i, j) = (p2.at(i + 1, j) - p2.at(i - 1, j)) * inv2h - (p1.at(i, j + 1) - p1.at(i, j - 1)) * inv2h;
    }
  }
  return out;
}

inline ScalarField laplacian(const ScalarField& psi) {
  const Grid& g = psi.grid();
  const Padded p = psi.padded();
  const double inv_h2 = 1.0 / (g.h() * g.h());
  ScalarField out(g, psi.extension());
  for (int j = 0; j < g.n(); ++j) {
    for (int i = 0; i < g.n(); ++i) {
      out(i, j) =
          (p.at(i + 1, j) + p.at(i - 1, j) + p.at(i, j + 1) + p.at(i, j - 1) - 4.0 * p.at(i, j)) * inv_h2;
    }
  }
  return out;
}

// Arakawa's nine-point Jacobian J(psi, q) = psi_x q_y - psi_y q_x.
inline ScalarField arakawa_jacobian(const ScalarField& psi, const ScalarField& q) {
  detail::check_same_grid(psi.grid(), q.grid());
  const Grid& g = psi.grid();
  const Padded a = psi.padded();
  const Padded b = q.padded();
  const double scale = 1.0 / (12.0 * g.h() * g.h());
  ScalarField out(g, q.extension());
  for (int j = 0; j < g.n(); ++j) {
    for (int i = 0; i < g.n(); ++i) {
      const double jpp = (a.at(i + 1, j) - a.at(i - 1, j)) * (b.at(i, j + 1) - b.at(i, j - 1)) -
                         (a.at(i, j + 1) - a.at(i, j - 1)) * (b.at(i + 1, j) - b.at(i - 1, j));
      const double jpx = a.at(i + 1, j) * (b.at(i + 1, j + 1) - b.at(i + 1, j - 1)) -
                         a.at(i - 1, j) * (b.at(i - 1, j + 1) - b.at(i - 1, j - 1)) -
                         a.at(i, j + 1) * (b.at(i + 1, j + 1) - b.at(i - 1, j + 1)) +
                         a.at(i, j - 1) * (b.at(i + 1, j - 1) - b.at(i - 1, j - 1));
      const double jxp = b.at(i, j + 1) * (a.at(i + 1, j + 1) - a.at(i - 1, j + 1)) -
                         b.at(i, j - 1) * (a.at(i + 1, j - 1) - a.at(i - 1, j - 1)) -
                         b.at(i + 1, j) * (a.at(i + 1, j + 1) - a.at(i + 1, j - 1)) +
                         b.at(i - 1, j) * (a.at(i - 1, j + 1) - a.at(i - 1, j - 1));
      out(i, j) = (jpp + jpx + jxp) * scale;
    }
  }
  return out;
}

// Discrete (u . grad) theta.
//
// arakawa: -J(psi, theta) with psi the streamfunction carried by u; skew in
// theta for zero-extended fields, so <advect(u,q), q> = 0 and
// <advect(u,q), p> = -<advect(u,p), q> up to round-off.
// upwind: first-order donor cell; a forward-Euler step with
// dt * (|u1| + |u2|) / h <= 1 is a convex combination of neighbour values.
inline ScalarField advect(const VectorField& u, const ScalarField& theta, AdvectionScheme scheme) {
  detail::check_same_grid(u.grid(), theta.grid());
  if (scheme == AdvectionScheme::arakawa) {
    const ScalarField* psi = u.stream();
    if (psi == nullptr) {
      throw std::invalid_argument("arakawa advection needs a velocity built from a streamfunction");
    }
    ScalarField out = arakawa_jacobian(*psi, theta);
    out *= -1.0;
    return out;
  }
  const Grid& g = theta.grid();
  const Padded q = theta.padded();
  const double inv_h = 1.0 / g.h();
  ScalarField out(g, theta.extension());
  for (int j = 0; j < g.n(); ++j) {
    for (int i = 0; i < g.n(); ++i) {
      const double a = u.u1()(i, j);
      const double b = u.u2()(i, j);
      const double c = q.at(i, j);
      const double dx = a > 0.0 ? c - q.at(i - 1, j) : q.at(i + 1, j) - c;
      const double dy = b > 0.0 ? c - q.at(i, j - 1) : q.at(i, j + 1) - c;
      out(i, j) = (a * dx + b * dy) * inv_h;
    }
  }
  return out;
}

}  // namespace eul2d
