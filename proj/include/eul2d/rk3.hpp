#pragma once

#include "eul2d/field.hpp"

namespace eul2d {

// Shu-Osher SSP-RK3 for z' = L(z, theta), theta in [0, 1] the stage time as
// a fraction of the step. Every stage is a convex combination of forward
// Euler steps, so any bound a forward Euler step respects carries over.
template <typename Rhs>
ScalarField ssp_rk3(const ScalarField& z, double dt, Rhs&& rhs) {
  ScalarField z1 = z;
  z1.axpy(dt, rhs(z, 0.0));

  ScalarField z2 = z1;
  z2.axpy(dt, rhs(z1, 1.0));
  z2 *= 0.25;
  z2.axpy(0.75, z);

  ScalarField z3 = z2;
  z3.axpy(dt, rhs(z2, 0.5));
  z3 *= 2.0 / 3.0;
  z3.axpy(1.0 / 3.0, z);
  return z3;
}

// Weights of the three stage right-hand sides in the final update.
inline constexpr double rk3_weights[3] = {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0};

}  // namespace eul2d
