#pragma once

// Dirichlet Poisson problems and the linear advection-diffusion solver.
//
// -Delta_h psi = f is solved either by diagonalizing the 5-point Laplacian in
// the sine basis (exact up to round-off) or by red-black SOR. The sine
// machinery also provides the heat semigroup exp(tau Delta_h) and the
// negative-order norms used by the estimates.

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "eul2d/errors.hpp"
#include "eul2d/field.hpp"
#include "eul2d/norms.hpp"
#include "eul2d/operators.hpp"
#include "eul2d/report.hpp"
#include "eul2d/rk3.hpp"
#include "eul2d/sine_series.hpp"
#include "eul2d/sine_transform.hpp"

namespace eul2d {

enum class PoissonMethod { sine, relaxation };

struct RelaxationResult {
  ScalarField psi;
  int iterations = 0;
  double relative_residual = 0.0;
};

class PoissonSolver {
 public:
  explicit PoissonSolver(const Grid& g, PoissonMethod method = PoissonMethod::sine, double tol = 1e-10,
                         int max_iter = 20000)
      : grid_(g), method_(method), tol_(tol), max_iter_(max_iter), transform_(std::make_shared<SineTransform>(g)) {
    if (!(tol > 0.0)) throw std::invalid_argument("Poisson tolerance must be positive");
    const int n = g.n();
    eig_.resize(g.size());
    for (int l = 0; l < n; ++l) {
      for (int k = 0; k < n; ++k) eig_[g.index(k, l)] = transform_->eigenvalue(k, l);
    }
    // Thomas sweep factors for (mu_k h^2 + 2) p_j - p_{j-1} - p_{j+1} = h^2 r_j.
    const double h = g.h();
    sweep_c_.resize(g.size());
    sweep_inv_.resize(g.size());
    for (int k = 0; k < n; ++k) {
      const double s = std::sin(0.5 * (k + 1) * std::numbers::pi * h);
      const double b = 4.0 * s * s + 2.0;
      double c = 0.0;
      for (int j = 0; j < n; ++j) {
        const double inv = 1.0 / (b + c);
        c = -inv;
        sweep_c_[g.index(k, j)] = c;
        sweep_inv_[g.index(k, j)] = inv;
      }
    }
  }

  const Grid& grid() const { return grid_; }
  PoissonMethod method() const { return method_; }
  double tolerance() const { return tol_; }
  const SineTransform& transform() const { return *transform_; }
  // Eigenvalues of -Delta_h, laid out like the transform coefficients.
  const std::vector<double>& eigenvalues() const { return eig_; }

  // psi with -Delta_h psi = f and psi = 0 on the walls.
  ScalarField solve(const ScalarField& f) const {
    detail::check_same_grid(f.grid(), grid_);
    if (method_ == PoissonMethod::relaxation) return relax(f).psi;
    return sweep_solve(f);
  }

  // Sine transform in x, tridiagonal solve in y for each wavenumber, back in x.
  ScalarField sweep_solve(const ScalarField& f) const {
    const int n = grid_.n();
    const auto un = static_cast<std::size_t>(n);
    const double h2 = grid_.h() * grid_.h();
    auto y = transform_->forward_x(f.values());
    for (std::size_t k = 0; k < un; ++k) y[k] = h2 * y[k] * sweep_inv_[k];
    for (std::size_t j = 1; j < un; ++j) {
      double* row = &y[j * un];
      const double* prev = &y[(j - 1) * un];
      const double* inv = &sweep_inv_[j * un];
      for (std::size_t k = 0; k < un; ++k) row[k] = (h2 * row[k] + prev[k]) * inv[k];
    }
    for (std::size_t j = un - 1; j-- > 0;) {
      double* row = &y[j * un];
      const double* next = &y[(j + 1) * un];
      const double* c = &sweep_c_[j * un];
      for (std::size_t k = 0; k < un; ++k) row[k] -= c[k] * next[k];
    }
    return ScalarField(grid_, transform_->inverse_x(y), Extension::dirichlet());
  }

  // Red-black SOR with the optimal factor for the unit square.
  RelaxationResult relax(const ScalarField& f) const {
    const int n = grid_.n();
    const double h2 = grid_.h() * grid_.h();
    const double omega = 2.0 / (1.0 + std::sin(std::numbers::pi * grid_.h()));
    RelaxationResult r{ScalarField(grid_), 0, 0.0};
    const double fnorm = l2_interior(f.values());
    if (fnorm == 0.0) return r;

    std::vector<double> p(static_cast<std::size_t>((n + 2) * (n + 2)), 0.0);
    auto at = [&](int i, int j) -> double& { return p[static_cast<std::size_t>((j + 1) * (n + 2) + i + 1)]; };
    auto residual = [&] {
      double s = 0.0;
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          const double lap = (at(i + 1, j) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1) - 4.0 * at(i, j)) / h2;
          const double e = f(i, j) + lap;
          s += e * e;
        }
      }
      return std::sqrt(s);
    };

    for (int it = 1; it <= max_iter_; ++it) {
      for (int colour = 0; colour < 2; ++colour) {
        for (int j = 0; j < n; ++j) {
          for (int i = (j + colour) % 2; i < n; i += 2) {
            const double gs = 0.25 * (at(i + 1, j) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1) + h2 * f(i, j));
            at(i, j) += omega * (gs - at(i, j));
          }
        }
      }
      if (it % 8 == 0 || it == max_iter_) {
        const double rel = residual() / fnorm;
        if (rel <= tol_) {
          for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) r.psi(i, j) = at(i, j);
          }
          r.iterations = it;
          r.relative_residual = rel;
          return r;
        }
      }
    }
    throw NumericalError("SOR did not reach relative residual " + std::to_string(tol_) + " in " +
                         std::to_string(max_iter_) + " iterations");
  }

  // Transform, scale coefficient (k,l) by m(lambda_kl), transform back.
  template <typename M>
  ScalarField apply_spectral(const ScalarField& f, M&& m) const {
    auto y = transform_->forward(f.values());
    for (std::size_t q = 0; q < y.size(); ++q) y[q] *= m(eig_[q]);
    ScalarField out(grid_, transform_->inverse(y), Extension::dirichlet());
    return out;
  }

  // exp(-tau (-Delta_h)) f; the identity for tau == 0.
  ScalarField heat(const ScalarField& f, double tau) const {
    if (tau == 0.0) {
      ScalarField out = f;
      out.set_extension(Extension::dirichlet());
      return out;
    }
    return apply_spectral(f, [tau](double lambda) { return std::exp(-tau * lambda); });
  }

  // |(-Delta_h)^(-s/2) f|_{L2}.
  double negative_norm(const ScalarField& f, double s) const {
    const auto y = transform_->forward(f.values());
    std::vector<double> terms(y.size());
    for (std::size_t q = 0; q < y.size(); ++q) terms[q] = std::pow(eig_[q], -s) * y[q] * y[q];
    return std::sqrt(transform_->l2_weight() * pairwise_sum(terms));
  }

  // Coefficients whose Euclidean norm is |(-Delta_h)^(-s/2) u|_{L2} for the
  // velocity u recovered from vorticity beta. Linear in beta.
  std::vector<double> dual_velocity_coefficients(const ScalarField& beta, double s) const {
    auto y = transform_->forward(beta.values());
    const double w = std::sqrt(transform_->l2_weight());
    for (std::size_t q = 0; q < y.size(); ++q) y[q] *= w * std::pow(eig_[q], -0.5 * (1.0 + s));
    return y;
  }

  double dual_velocity_norm(const ScalarField& beta, double s) const {
    const auto c = dual_velocity_coefficients(beta, s);
    std::vector<double> sq(c.size());
    for (std::size_t q = 0; q < c.size(); ++q) sq[q] = c[q] * c[q];
    return std::sqrt(pairwise_sum(sq));
  }

 private:
  static double l2_interior(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  }

  Grid grid_;
  PoissonMethod method_;
  double tol_;
  int max_iter_;
  std::shared_ptr<const SineTransform> transform_;
  std::vector<double> eig_;
  std::vector<double> sweep_c_, sweep_inv_;
};

inline ScalarField solve_streamfunction(const ScalarField& beta, const PoissonSolver& solver) {
  return solver.solve(beta);
}

inline ScalarField solve_streamfunction(const ScalarField& beta) {
  return solve_streamfunction(beta, PoissonSolver(beta.grid()));
}

inline VectorField recover_velocity(const ScalarField& beta, const PoissonSolver& solver) {
  return perp_gradient(solver.solve(beta));
}

inline VectorField recover_velocity(const ScalarField& beta) { return recover_velocity(beta, PoissonSolver(beta.grid())); }

// Ratio |grad u|^2 / (|beta|^2 + |u|^2) for u = recover_velocity(beta).
inline EstimateReport gradient_bound_check(const ScalarField& beta, const PoissonSolver& solver, double bound = 1.05) {
  EstimateReport r("gradient-bound");
  r.input("N", static_cast<double>(beta.grid().n()));
  const VectorField u = recover_velocity(beta, solver);
  const double g = gradient_l2(u);
  const double b = lp_norm(beta, 2.0);
  const double ul = lp_norm(u, 2.0);
  const double den = b * b + ul * ul;
  const double ratio = den == 0.0 ? 0.0 : g * g / den;
  r.measure("grad_u_l2_sq", g * g);
  r.measure("beta_l2_sq", b * b);
  r.measure("u_l2_sq", ul * ul);
  r.check("empirical_constant", ratio, bound, Sense::at_most);
  return r;
}

inline EstimateReport gradient_bound_check(const ScalarField& beta) {
  return gradient_bound_check(beta, PoissonSolver(beta.grid()));
}

struct EllipticConvergenceParams {
  std::vector<int> n_list = {64, 128};
  SineSeries stream = SineSeries::mode(2, 3);  // manufactured psi
  double ratio_min = 3.5;
  double ratio_max = 4.5;
};

// L2 error of recover_velocity(-Delta psi) against the exact perp gradient on
// successive grids; each ratio is checked against [ratio_min, ratio_max].
inline EstimateReport elliptic_convergence(const EllipticConvergenceParams& prm = {}) {
  if (prm.n_list.size() < 2) throw std::invalid_argument("convergence study needs at least two grids");
  if (prm.stream.empty()) throw std::invalid_argument("manufactured streamfunction is empty");
  EstimateReport r("elliptic-convergence");
  std::string grids;
  for (int n : prm.n_list) grids += (grids.empty() ? "" : ", ") + std::to_string(n);
  r.input("n_list", grids);
  std::vector<double> err;
  for (int n : prm.n_list) {
    const Grid g(n);
    const VectorField u = recover_velocity(prm.stream.negative_laplacian().sample(g));
    err.push_back(lp_norm(u - prm.stream.sample_perp_gradient(g), 2.0));
    r.measure("error_l2[N=" + std::to_string(n) + "]", err.back());
  }
  for (std::size_t i = 0; i + 1 < err.size(); ++i) {
    const std::string tag = "[N=" + std::to_string(prm.n_list[i]) + "->" + std::to_string(prm.n_list[i + 1]) + "]";
    const double ratio = err[i] / err[i + 1];
    r.check("ratio_min" + tag, ratio, prm.ratio_min, Sense::at_least);
    r.check("ratio_max" + tag, ratio, prm.ratio_max, Sense::at_most);
  }
  return r;
}

// Largest dt with dt * max|u| / h <= safety.
inline double cfl_number(const VectorField& u, double dt) { return dt * linf_norm(u) / u.grid().h(); }

inline void check_cfl(const VectorField& u, double dt, double safety) {
  const double c = cfl_number(u, dt);
  if (!(c <= safety)) {
    const double umax = linf_norm(u);
    throw CflError(c, safety, umax > 0.0 ? safety * u.grid().h() / umax : 0.0);
  }
}

// v_t + (u.grad) v = nu Delta_h v + g with v = 0 on the walls.
//
// Each step freezes u and g at the left end, advances advection and source
// with SSP-RK3, then applies the exact heat semigroup exp(nu dt Delta_h).
// u_path and g_path hold one entry per step; the result has one more entry.
inline TimeSeries<ScalarField> solve_advect_diffuse(const TimeSeries<VectorField>& u_path,
                                                    const TimeSeries<ScalarField>& g_path, const ScalarField& v0,
                                                    double nu, double dt, const PoissonSolver& solver,
                                                    AdvectionScheme scheme = AdvectionScheme::upwind,
                                                    double cfl_safety = 0.5) {
  if (!(nu > 0.0)) throw std::invalid_argument("advection-diffusion needs nu > 0");
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  if (u_path.size() != g_path.size()) throw std::invalid_argument("velocity and source paths differ in length");
  TimeSeries<ScalarField> out;
  ScalarField v = v0;
  v.set_extension(Extension::dirichlet());
  const double t0 = u_path.empty() ? 0.0 : u_path.time(0);
  out.push_back(t0, v);
  for (std::size_t n = 0; n < u_path.size(); ++n) {
    const VectorField& u = u_path[n];
    check_cfl(u, dt, cfl_safety);
    ScalarField g = g_path[n];
    g.set_extension(Extension::dirichlet());
    v = ssp_rk3(v, dt, [&](const ScalarField& z, double) {
      ScalarField rhs = g;
      rhs -= advect(u, z, scheme);
      return rhs;
    });
    v = solver.heat(v, nu * dt);
    if (!v.all_finite()) throw NumericalError("advection-diffusion state became non-finite");
    out.push_back(t0 + static_cast<double>(n + 1) * dt, v);
  }
  return out;
}

// Step-1 energy inequality of the linear problem:
//   |v(t)|^2 <= (|v0|^2 + (1/nu) int |g|_{-1}^2) exp(C int |grad u|_{L2} |u|_{L2})
// evaluated with C = 1, together with the smallest C that makes it hold.
inline EstimateReport parabolic_energy_report(const TimeSeries<VectorField>& u_path,
                                              const TimeSeries<ScalarField>& g_path,
                                              const TimeSeries<ScalarField>& v_path, double nu,
                                              const PoissonSolver& solver) {
  EstimateReport r("parabolic-energy");
  r.input("nu", nu);
  const double dt = v_path.size() > 1 ? v_path.time(1) - v_path.time(0) : 0.0;
  const double v0 = lp_norm(v_path[0], 2.0);
  double source = 0.0, coupling = 0.0, worst = 0.0, c_needed = 0.0;
  for (std::size_t n = 0; n + 1 < v_path.size(); ++n) {
    const double gm = solver.negative_norm(g_path[n], 1.0);
    source += dt * gm * gm / nu;
    coupling += dt * gradient_l2(u_path[n]) * lp_norm(u_path[n], 2.0);
    const double lhs = std::pow(lp_norm(v_path[n + 1], 2.0), 2);
    const double base = v0 * v0 + source;
    const double rhs = base * std::exp(coupling);
    worst = std::max(worst, base > 0.0 ? lhs / rhs : 0.0);
    if (lhs > base && coupling > 0.0) c_needed = std::max(c_needed, std::log(lhs / base) / coupling);
  }
  r.measure("empirical_C", c_needed);
  r.check("max_lhs_over_rhs", worst, 1.0, Sense::at_most, false);
  return r;
}

}  // namespace eul2d
