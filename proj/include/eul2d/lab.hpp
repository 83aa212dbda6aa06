#pragma once

// Estimate experiments. Each one runs or consumes trajectories and returns an
// EstimateReport whose thresholds come from its parameter struct.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "eul2d/dynamics.hpp"
#include "eul2d/elliptic.hpp"
#include "eul2d/format.hpp"
#include "eul2d/norms.hpp"
#include "eul2d/parallel.hpp"
#include "eul2d/report.hpp"
#include "eul2d/sine_transform.hpp"
#include "eul2d/stats.hpp"
#include "eul2d/time_norm.hpp"

namespace eul2d {

// Paths m = 0..M-1 of one configuration; path m uses path_index m.
struct Ensemble {
  SolverConfig config;
  std::vector<Trajectory> paths;
};

namespace detail {

inline std::string tag(const std::string& q, double v) { return q + "[" + format_double(v) + "]"; }

inline std::string list_text(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

inline void require_complete(const Trajectory& tr, const std::string& what) {
  if (!tr.complete) throw NumericalError(what + " did not finish: " + tr.error);
}

// |u - v|_{L2} for the velocities of two vorticities, in the <psi, beta> form.
inline double velocity_distance(const PoissonSolver& solver, const ScalarField& a, const ScalarField& b) {
  const ScalarField d = a - b;
  return std::sqrt(std::max(inner(solver.solve(d), d), 0.0));
}

inline double time_trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
  std::vector<double> terms;
  for (std::size_t k = 1; k < t.size(); ++k) terms.push_back(0.5 * (t[k] - t[k - 1]) * (f[k] + f[k - 1]));
  return pairwise_sum(terms);
}

inline bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

inline std::vector<Trajectory> run_all(const std::vector<SolverConfig>& cfgs, const InitialVorticity& beta0,
                                       int threads) {
  return parallel_map(cfgs.size(), threads, [&](std::size_t i) { return run(cfgs[i], beta0); });
}

// sup over recorded steps of |u|_{L2} from the energy diagnostic.
inline double sup_velocity_l2(const Trajectory& tr) {
  double s = 0.0;
  for (const auto& d : tr.diagnostics) s = std::max(s, std::sqrt(std::max(2.0 * d.energy, 0.0)));
  return s;
}

inline double sup_h1(const Trajectory& tr) {
  double s = 0.0;
  for (const auto& d : tr.diagnostics) s = std::max(s, d.h1_u);
  return s;
}

inline double sup_beta_l2(const Trajectory& tr) {
  double s = 0.0;
  for (const auto& d : tr.diagnostics) s = std::max(s, std::sqrt(std::max(2.0 * d.enstrophy, 0.0)));
  return s;
}

}  // namespace detail

inline Ensemble run_ensemble(const SolverConfig& cfg, const InitialVorticity& beta0, std::size_t paths,
                             int threads = 1) {
  cfg.validate();
  Ensemble e;
  e.config = cfg;
  e.paths = parallel_map(paths, threads, [&](std::size_t m) {
    SolverConfig c = cfg;
    c.path_index = m;
    return run(c, beta0);
  });
  return e;
}

// ---------------------------------------------------------------------------
// Weak form: <beta(t), psi> - <beta0, psi> - int drift - noise pairing, per
// test mode, with the drift evaluated at the left end of each step.

// Signed residual per recorded step (rows) and test mode (columns).
inline std::vector<std::vector<double>> weak_residual_series(const Trajectory& tr, int test_modes) {
  if (tr.noise.modes() != tr.config.noise.size()) throw std::invalid_argument("trajectory has no noise record");
  if (test_modes < 1) throw std::invalid_argument("weak residual needs at least one test mode");
  if (static_cast<std::size_t>(test_modes) > tr.weak.modes.size()) {
    throw std::invalid_argument("trajectory recorded " + std::to_string(tr.weak.modes.size()) +
                                " test modes, " + std::to_string(test_modes) + " requested");
  }
  detail::require_complete(tr, "run");
  const double dt = tr.config.dt;
  const auto modes = static_cast<std::size_t>(test_modes);
  std::vector<std::vector<double>> out(tr.weak.pairing.size(), std::vector<double>(modes, 0.0));
  std::vector<double> acc(modes, 0.0);
  for (std::size_t n = 0; n < tr.weak.drift.size(); ++n) {
    for (std::size_t m = 0; m < modes; ++m) {
      acc[m] += dt * tr.weak.drift[n][m] + tr.weak.noise[n][m];
      out[n + 1][m] = tr.weak.pairing[n + 1][m] - tr.weak.pairing[0][m] - acc[m];
    }
  }
  return out;
}

// max over time of |residual| per test mode.
inline std::vector<double> weak_residuals(const Trajectory& tr, int test_modes) {
  const auto series = weak_residual_series(tr, test_modes);
  std::vector<double> worst(static_cast<std::size_t>(test_modes), 0.0);
  for (const auto& row : series) {
    for (std::size_t m = 0; m < worst.size(); ++m) worst[m] = std::max(worst[m], std::abs(row[m]));
  }
  return worst;
}

struct WeakResidualParams {
  int test_modes = 4;
  double tolerance = 1e-2;
};

inline EstimateReport weak_residual_check(const Trajectory& tr, const WeakResidualParams& prm = {}) {
  EstimateReport r("weak-residual");
  r.input("test_modes", std::to_string(prm.test_modes));
  r.input("dt", tr.config.dt);
  r.input("N", std::to_string(tr.config.N));
  const auto res = weak_residuals(tr, prm.test_modes);
  for (std::size_t m = 0; m < res.size(); ++m) {
    const auto& t = tr.weak.modes[m];
    r.measure("residual_mode_" + std::to_string(t.k) + "_" + std::to_string(t.l), res[m]);
  }
  r.check("max_residual", *std::max_element(res.begin(), res.end()), prm.tolerance, Sense::at_most);
  return r;
}

struct WeakRefinementParams {
  int test_modes = 4;
  double dt_ratio_bound = 1.8;
  double h_ratio_bound = 3.5;
  bool refine_dt = true;
  bool refine_h = true;
  double h_study_dt_divisor = 8.0;  // the h study runs at dt / divisor
};

// Time order: runs at dt, dt/2, dt/4 on one nested Brownian path. The
// residual is S(h) + O(dt) with S independent of dt to leading order, so the
// ratio of successive differences max|R_dt - R_dt/2| / max|R_dt/2 - R_dt/4|
// (compared on the coarse time grid) measures the time order.
// Space order: N -> 2N+1 (h halves) at dt / h_study_dt_divisor, raw ratio.
inline EstimateReport weak_residual_refinement(const SolverConfig& base, const InitialVorticity& beta0,
                                               const WeakRefinementParams& prm = {}, int threads = 1) {
  EstimateReport r("weak-residual");
  r.input("N", std::to_string(base.N));
  r.input("dt", base.dt);
  r.input("test_modes", std::to_string(prm.test_modes));
  r.input("dt_ratio_bound", prm.dt_ratio_bound);
  r.input("h_ratio_bound", prm.h_ratio_bound);
  r.input("h_study_dt_divisor", prm.h_study_dt_divisor);
  auto pow2 = [](std::size_t n) { return n > 0 && (n & (n - 1)) == 0; };
  std::vector<SolverConfig> cfgs;
  SolverConfig c = base;
  c.test_modes = std::max(c.test_modes, prm.test_modes);
  if (prm.refine_dt) {
    if (c.noise.size() > 0 && !pow2(c.steps())) {
      throw std::invalid_argument("dt refinement with noise needs a power-of-two step count");
    }
    for (int level = 0; level < 3; ++level) {
      SolverConfig f = c;
      f.dt = c.dt / static_cast<double>(1 << level);
      f.snapshot_stride = c.snapshot_stride * (1 << level);
      cfgs.push_back(f);
    }
  }
  if (prm.refine_h) {
    if (std::holds_alternative<ScalarField>(beta0)) {
      throw std::invalid_argument("h refinement needs analytic initial vorticity");
    }
    SolverConfig coarse = c;
    coarse.dt = c.dt / prm.h_study_dt_divisor;
    if (coarse.noise.size() > 0 && !pow2(coarse.steps())) {
      throw std::invalid_argument("h study step count must be a power of two");
    }
    SolverConfig fine = coarse;
    fine.N = 2 * c.N + 1;
    cfgs.push_back(coarse);
    cfgs.push_back(fine);
  }
  const auto runs = detail::run_all(cfgs, beta0, threads);
  for (const auto& tr : runs) detail::require_complete(tr, "weak-residual run");
  auto worst = [&](const Trajectory& tr) {
    const auto res = weak_residuals(tr, prm.test_modes);
    return *std::max_element(res.begin(), res.end());
  };
  std::size_t k = 0;
  if (prm.refine_dt) {
    std::vector<std::vector<std::vector<double>>> series;
    for (int level = 0; level < 3; ++level) {
      series.push_back(weak_residual_series(runs[k + level], prm.test_modes));
      r.measure("residual_dt/" + std::to_string(1 << level), worst(runs[k + level]));
    }
    auto gap = [&](int a, int b) {
      double g = 0.0;
      const std::size_t sa = 1u << a, sb = 1u << b;
      for (std::size_t n = 0; n < series[0].size(); ++n) {
        for (std::size_t m = 0; m < series[0][n].size(); ++m) {
          g = std::max(g, std::abs(series[a][n * sa][m] - series[b][n * sb][m]));
        }
      }
      return g;
    };
    const double d1 = gap(0, 1), d2 = gap(1, 2);
    r.measure("difference_dt_dt/2", d1);
    r.measure("difference_dt/2_dt/4", d2);
    r.check("dt_ratio", d1 / d2, prm.dt_ratio_bound, Sense::at_least);
    k += 3;
  }
  if (prm.refine_h) {
    const double a = worst(runs[k]), b = worst(runs[k + 1]);
    r.measure("residual_h", a);
    r.measure("residual_h/2", b);
    r.check("h_ratio", a / b, prm.h_ratio_bound, Sense::at_least);
  }
  return r;
}

// ---------------------------------------------------------------------------

struct NuStudyParams {
  std::vector<double> nu_list = {1e-2, 1e-3, 1e-4};
  double bound_factor = 2.0;
};

inline void check_nu_list(const std::vector<double>& nu, bool strict) {
  if (nu.empty()) throw std::invalid_argument("viscosity list is empty");
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (!(nu[i] >= 0.0)) throw std::invalid_argument("viscosities must be >= 0");
    if (i > 0 && (strict ? !(nu[i] < nu[i - 1]) : !(nu[i] <= nu[i - 1]))) {
      throw std::invalid_argument("viscosity list must be decreasing");
    }
  }
}

// sup_t |beta_nu|_{L2} and sup_t |u_nu|_{H1} on one shared noise path.
inline EstimateReport uniform_in_nu_study(const SolverConfig& base, const InitialVorticity& beta0,
                                          const NuStudyParams& prm = {}, int threads = 1) {
  check_nu_list(prm.nu_list, false);
  EstimateReport r("uniform-nu");
  r.input("nu_list", detail::list_text(prm.nu_list));
  r.input("bound_factor", prm.bound_factor);
  r.input("noise", to_string(base.noise.kind));
  std::vector<SolverConfig> cfgs;
  for (double nu : prm.nu_list) {
    SolverConfig c = base;
    c.nu = nu;
    cfgs.push_back(c);
  }
  const auto runs = detail::run_all(cfgs, beta0, threads);
  std::vector<double> sb, sh;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    detail::require_complete(runs[i], "run at nu = " + format_double(prm.nu_list[i]));
    sb.push_back(detail::sup_beta_l2(runs[i]));
    sh.push_back(detail::sup_h1(runs[i]));
    r.measure(detail::tag("sup_beta_l2", prm.nu_list[i]), sb.back());
    r.measure(detail::tag("sup_u_h1", prm.nu_list[i]), sh.back());
  }
  const auto [bmin, bmax] = std::minmax_element(sb.begin(), sb.end());
  const auto [hmin, hmax] = std::minmax_element(sh.begin(), sh.end());
  r.check("ratio_beta_l2", *bmax / *bmin, prm.bound_factor, Sense::at_most);
  r.check("ratio_u_h1", *hmax / *hmin, prm.bound_factor, Sense::at_most);
  return r;
}

// ---------------------------------------------------------------------------

struct VanishingViscosityParams {
  std::vector<double> nu_list = {1e-2, 2.5e-3, 6.25e-4};
};

// nu * int grad u : grad phi_1 with phi_1 = perp grad of sin(pi x) sin(pi y).
inline double viscous_pairing(const VectorField& u) {
  const Grid& g = u.grid();
  constexpr double pi = std::numbers::pi;
  const auto d = detail::velocity_gradient(u);
  auto psi_xy = [&](double x, double y) { return pi * pi * std::cos(pi * x) * std::cos(pi * y); };
  auto psi_xx = [&](double x, double y) { return -pi * pi * std::sin(pi * x) * std::sin(pi * y); };
  const ScalarField fx1 = ScalarField::sample(g, psi_xy, Extension::free());   // d/dx phi_1
  const ScalarField fy1 = ScalarField::sample(g, psi_xx, Extension::free());   // d/dy phi_1 = psi_yy
  const ScalarField fx2 = -1.0 * ScalarField::sample(g, psi_xx, Extension::free());
  const ScalarField fy2 = -1.0 * fx1;
  return inner(d.dx1, fx1) + inner(d.dy1, fy1) + inner(d.dx2, fx2) + inner(d.dy2, fy2);
}

inline EstimateReport vanishing_viscosity_convergence(const SolverConfig& base, const InitialVorticity& beta0,
                                                      const VanishingViscosityParams& prm = {}, int threads = 1) {
  check_nu_list(prm.nu_list, true);
  if (prm.nu_list.back() == 0.0) throw std::invalid_argument("the nu = 0 limit run is added automatically");
  EstimateReport r("vv-limit");
  r.input("nu_list", detail::list_text(prm.nu_list));
  r.input("noise", to_string(base.noise.kind));
  std::vector<SolverConfig> cfgs;
  for (double nu : prm.nu_list) {
    SolverConfig c = base;
    c.nu = nu;
    cfgs.push_back(c);
  }
  SolverConfig limit = base;
  limit.nu = 0.0;
  cfgs.push_back(limit);
  const auto runs = detail::run_all(cfgs, beta0, threads);
  for (std::size_t i = 0; i < runs.size(); ++i) detail::require_complete(runs[i], "run " + std::to_string(i));
  const Trajectory& zero = runs.back();
  const PoissonSolver solver{Grid(base.N)};
  const std::vector<double>& times = zero.snapshots.times();

  auto l2q = [&](const Trajectory& a, const Trajectory& b) {
    std::vector<double> sq;
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double d = detail::velocity_distance(solver, a.snapshots[k], b.snapshots[k]);
      sq.push_back(d * d);
    }
    return std::sqrt(detail::time_trapezoid(times, sq));
  };

  std::vector<double> dist, cauchy, a_max;
  for (std::size_t i = 0; i < prm.nu_list.size(); ++i) {
    dist.push_back(l2q(runs[i], zero));
    r.measure(detail::tag("dist_to_euler", prm.nu_list[i]), dist.back());
    double am = 0.0;
    for (std::size_t k = 0; k < runs[i].snapshots.size(); ++k) {
      am = std::max(am, std::abs(viscous_pairing(recover_velocity(runs[i].snapshots[k], solver))));
    }
    a_max.push_back(prm.nu_list[i] * am);
    r.measure(detail::tag("max_nu_a_phi1", prm.nu_list[i]), a_max.back());
  }
  for (std::size_t i = 0; i + 1 < prm.nu_list.size(); ++i) {
    cauchy.push_back(l2q(runs[i], runs[i + 1]));
    r.measure(detail::tag("cauchy", prm.nu_list[i + 1]), cauchy.back());
  }
  if (prm.nu_list.size() < 2) {
    r.note("insufficient data: one viscosity, monotonicity not assessed");
    return r;
  }
  r.require("dist_to_euler_decreasing", detail::strictly_decreasing(dist));
  if (cauchy.size() >= 2) r.require("cauchy_decreasing", detail::strictly_decreasing(cauchy));
  r.require("nu_a_phi1_decreasing", detail::strictly_decreasing(a_max));
  return r;
}

// ---------------------------------------------------------------------------

struct MaxPrincipleParams {
  double epsilon = 1e-3;
};

// |z|_inf <= (|z0|_inf + int |g|_inf) (1 + eps) along an upwind run, with z = beta
// when there is no additive noise.
inline EstimateReport maximum_principle_check(const SolverConfig& cfg, const InitialVorticity& beta0,
                                              const MaxPrincipleParams& prm = {}) {
  if (cfg.advection != AdvectionScheme::upwind) {
    throw std::invalid_argument("maximum principle check needs upwind advection");
  }
  if (cfg.noise.kind == NoiseKind::multiplicative) {
    throw std::invalid_argument("maximum principle check needs additive noise or none");
  }
  EstimateReport r("max-principle");
  r.input("epsilon", prm.epsilon);
  r.input("noise", to_string(cfg.noise.kind));
  const Trajectory tr = run(cfg, beta0);
  detail::require_complete(tr, "run");
  const ScalarField& b0 = tr.snapshots[0];
  const double z0 = linf_norm(b0);
  double budget = z0, worst = -std::numeric_limits<double>::infinity(), sup_z = z0, min_z = 0.0, adv = 0.0;
  double min0 = *std::min_element(b0.values().begin(), b0.values().end());
  for (const auto& s : tr.additive) {
    budget += s.g_integral;
    sup_z = std::max(sup_z, s.linf_z);
    min_z = std::min(min_z, s.min_z);
    adv = std::max(adv, s.advected_curl_w);
    worst = std::max(worst, s.linf_z - budget * (1.0 + prm.epsilon));
  }
  r.measure("z0_linf", z0);
  r.measure("g_integral", budget - z0);
  r.measure("sup_z_linf", sup_z);
  r.measure("min_z", std::min(min0, min_z));
  r.measure("max_advected_curl_w", adv);
  r.check("excess_over_bound", worst, 0.0, Sense::at_most);
  return r;
}

// ---------------------------------------------------------------------------

struct KatoParams {
  std::vector<double> p_list = {2, 4, 8, 16, 32};
  int samples = 100;
  int N = 128;
  int kmax = 16;
  std::uint64_t seed = 1;
  double slope_bound = 0.6;
};

// Random sine series sum a_kl sin sin, k, l <= kmax, a_kl ~ N(0,1) / (k^2 + l^2).
inline ScalarField random_band_limited_field(const SineTransform& tr, int kmax, RngStream& rng) {
  const Grid& g = tr.grid();
  std::vector<double> c(g.size(), 0.0);
  const int km = std::min(kmax, g.n());
  for (int l = 0; l < km; ++l) {
    for (int k = 0; k < km; ++k) {
      c[g.index(k, l)] = rng.normal() / static_cast<double>((k + 1) * (k + 1) + (l + 1) * (l + 1));
    }
  }
  auto v = tr.forward(c);
  for (double& x : v) x *= 0.25;
  return ScalarField(g, std::move(v), Extension::dirichlet());
}

inline EstimateReport kato_constant_estimate(const KatoParams& prm = {}) {
  if (prm.p_list.size() < 2) throw std::invalid_argument("Kato fit needs at least two exponents");
  for (double p : prm.p_list) {
    if (!(p >= 2.0)) throw std::invalid_argument("Kato exponents must be >= 2");
  }
  if (prm.samples < 1) throw std::invalid_argument("Kato estimate needs samples");
  EstimateReport r("kato");
  r.input("p_list", detail::list_text(prm.p_list));
  r.input("samples", std::to_string(prm.samples));
  r.input("N", std::to_string(prm.N));
  r.input("kmax", std::to_string(prm.kmax));
  const SineTransform tr{Grid(prm.N)};
  RngStream rng(prm.seed, 0);
  std::vector<double> worst(prm.p_list.size(), 0.0);
  int used = 0;
  for (int s = 0; s < prm.samples; ++s) {
    const ScalarField v = random_band_limited_field(tr, prm.kmax, rng);
    const double h1 = h1_norm(v);
    if (!(h1 > 0.0)) continue;
    ++used;
    for (std::size_t i = 0; i < prm.p_list.size(); ++i) worst[i] = std::max(worst[i], lp_norm(v, prm.p_list[i]) / h1);
  }
  if (used == 0) throw NumericalError("every Kato sample vanished");
  for (std::size_t i = 0; i < worst.size(); ++i) {
    r.measure(detail::tag("max_ratio", prm.p_list[i]), worst[i]);
    r.measure(detail::tag("C_p", prm.p_list[i]), worst[i] / std::sqrt(prm.p_list[i]));
  }
  r.check("slope", loglog_slope(prm.p_list, worst), prm.slope_bound, Sense::at_most);
  return r;
}

// ---------------------------------------------------------------------------

struct W1pParams {
  std::vector<double> p_list = {2, 4, 8, 16};
  double slope_bound = 1.1;
};

inline EstimateReport w1p_growth_study(const SolverConfig& cfg, const InitialVorticity& beta0,
                                       const W1pParams& prm = {}) {
  if (prm.p_list.size() < 2) throw std::invalid_argument("W^{1,p} fit needs at least two exponents");
  if (cfg.noise.kind == NoiseKind::multiplicative) {
    throw std::invalid_argument("W^{1,p} study needs additive noise or none");
  }
  EstimateReport r("w1p");
  r.input("p_list", detail::list_text(prm.p_list));
  r.input("noise", to_string(cfg.noise.kind));
  SolverConfig c = cfg;
  c.w1p_orders = prm.p_list;
  const Trajectory tr = run(c, beta0);
  detail::require_complete(tr, "run");
  for (std::size_t i = 0; i < prm.p_list.size(); ++i) r.measure(detail::tag("sup_w1p", prm.p_list[i]), tr.w1p_sup[i]);
  for (std::size_t i = 0; i < prm.p_list.size(); ++i) {
    if (prm.p_list[i] == 2.0) r.require("p2_equals_h1_diagnostic", tr.w1p_sup[i] == detail::sup_h1(tr));
  }
  r.check("slope", loglog_slope(prm.p_list, tr.w1p_sup), prm.slope_bound, Sense::at_most);
  return r;
}

// ---------------------------------------------------------------------------

struct YudovichParams {
  std::vector<double> delta_list = {1e-4, 1e-3, 1e-2};
  std::vector<double> checkpoints = {0.25, 0.5, 1.0};
  SineSeries perturbation = SineSeries::mode(3, 2);
};

// min over p in 3..64 of (Ct)^((p-2)/2) (p/(p-2))^((p-2)/2) (Cp)^(1/2).
inline double yudovich_envelope(double C, double t) {
  double best = std::numeric_limits<double>::infinity();
  for (int p = 3; p <= 64; ++p) {
    const double e = 0.5 * (p - 2);
    best = std::min(best, std::pow(C * t, e) * std::pow(p / (p - 2.0), e) * std::sqrt(C * p));
  }
  return best;
}

inline EstimateReport yudovich_stability(const SolverConfig& cfg, const InitialVorticity& beta0,
                                         const YudovichParams& prm = {}, int threads = 1) {
  if (cfg.nu != 0.0) throw std::invalid_argument("Yudovich study needs nu = 0");
  if (cfg.noise.kind == NoiseKind::multiplicative) throw std::invalid_argument("Yudovich study needs additive noise or none");
  for (double d : prm.delta_list) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw std::invalid_argument("perturbation sizes must be finite and >= 0");
  }
  EstimateReport r("yudovich");
  r.input("delta_list", detail::list_text(prm.delta_list));
  r.input("checkpoints", detail::list_text(prm.checkpoints));
  const Grid g(cfg.N);
  const ScalarField b0 = sample_initial(beta0, g);
  const ScalarField pert = prm.perturbation.sample(g);
  if (!pert.all_finite()) throw std::invalid_argument("perturbation vorticity is not bounded");

  std::vector<double> deltas;
  for (double d : prm.delta_list) {
    if (d > 0.0) deltas.push_back(d);
  }
  std::sort(deltas.begin(), deltas.end());
  deltas.erase(std::unique(deltas.begin(), deltas.end()), deltas.end());

  // twin runs of identical data, then one run per delta
  std::vector<ScalarField> starts = {b0, b0};
  for (double d : deltas) {
    ScalarField s = b0;
    s.axpy(d, pert);
    starts.push_back(std::move(s));
  }
  const auto runs = parallel_map(starts.size(), threads, [&](std::size_t i) { return run(cfg, starts[i]); });
  for (const auto& tr : runs) detail::require_complete(tr, "Yudovich run");
  bool twins = runs[0].diagnostics.size() == runs[1].diagnostics.size() &&
               runs[0].snapshots.size() == runs[1].snapshots.size();
  for (std::size_t k = 0; twins && k < runs[0].snapshots.size(); ++k) twins = runs[0].snapshots[k] == runs[1].snapshots[k];
  for (std::size_t k = 0; twins && k < runs[0].diagnostics.size(); ++k) {
    const auto &a = runs[0].diagnostics[k], &b = runs[1].diagnostics[k];
    twins = a.energy == b.energy && a.enstrophy == b.enstrophy && a.linf_vorticity == b.linf_vorticity &&
            a.h1_u == b.h1_u && a.cfl == b.cfl;
  }
  r.require("identical_data_bitwise", twins);
  if (deltas.empty()) {
    r.note("no positive perturbation size; stability profile skipped");
    return r;
  }

  const PoissonSolver solver(g);
  const auto& times = runs[0].snapshots.times();
  std::vector<std::size_t> at;
  for (double t : prm.checkpoints) {
    auto it = std::find_if(times.begin(), times.end(), [&](double s) { return std::abs(s - t) <= 1e-9 * std::max(1.0, t); });
    if (it == times.end()) throw std::invalid_argument("checkpoint t = " + format_double(t) + " is not a snapshot time");
    at.push_back(static_cast<std::size_t>(it - times.begin()));
  }
  // d[i][c]: separation for deltas[i] at checkpoint c
  std::vector<std::vector<double>> d(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    for (std::size_t c = 0; c < at.size(); ++c) {
      d[i].push_back(detail::velocity_distance(solver, runs[2 + i].snapshots[at[c]], runs[0].snapshots[at[c]]));
      r.measure("separation[delta=" + format_double(deltas[i]) + ",t=" + format_double(prm.checkpoints[c]) + "]",
                d[i].back());
    }
  }
  bool monotone = true;
  for (std::size_t c = 0; c < at.size(); ++c) {
    for (std::size_t i = 1; i < deltas.size(); ++i) {
      monotone = monotone && d[i][c] > d[i - 1][c];
      r.measure("contraction[delta=" + format_double(deltas[i]) + ",t=" + format_double(prm.checkpoints[c]) + "]",
                d[i - 1][c] / d[i][c]);
    }
  }
  r.require("separation_monotone_in_delta", monotone);

  double C = 0.0;
  for (const auto& diag : runs[0].diagnostics) C = std::max(C, diag.linf_vorticity);
  r.measure("C_estimate", C);
  for (std::size_t c = 0; c < at.size(); ++c) {
    r.measure(detail::tag("envelope", prm.checkpoints[c]), yudovich_envelope(C, prm.checkpoints[c]));
  }
  const double t0 = prm.checkpoints.front();
  if (C * t0 < 1.0) {
    r.check("envelope_minus_separation_t0", yudovich_envelope(C, t0) - d.back().front(), 0.0, Sense::at_least, false);
  } else {
    r.note("C t >= 1 at the earliest checkpoint; envelope comparison skipped");
  }
  r.note("stability profile for perturbed data is exploratory");
  return r;
}

// ---------------------------------------------------------------------------
// Ensemble moments. One ensemble per viscosity, labelled by its config.

using EnsembleSet = std::vector<Ensemble>;

struct MomentParams {
  std::vector<double> p_list = {2, 4};
  double ratio_bound = 2.0;
  int resamples = 2000;
  double level = 0.95;
  std::uint64_t bootstrap_seed = 1;
  std::size_t min_paths = 8;
};

namespace detail {

// E S^p per viscosity with bootstrap intervals, cross-nu ratios and Jensen
// consistency between consecutive exponents.
inline void moment_table(EstimateReport& r, const std::string& label,
                         const std::vector<std::pair<double, std::vector<double>>>& sups, const MomentParams& prm) {
  std::vector<double> ps = prm.p_list;
  std::sort(ps.begin(), ps.end());
  for (const auto& [nu, s] : sups) {
    std::vector<Interval> est;
    for (double p : ps) {
      std::vector<double> x;
      for (double v : s) x.push_back(std::pow(v, p));
      est.push_back(bootstrap_mean(x, prm.resamples, prm.level, prm.bootstrap_seed));
      const std::string key = label + "^" + format_double(p) + "[nu=" + format_double(nu) + "]";
      r.require("finite_" + key, std::isfinite(est.back().estimate));
      r.measure("E_" + key, est.back().estimate);
      r.measure("ci_lower_" + key, est.back().lower);
      r.measure("ci_upper_" + key, est.back().upper);
    }
    for (std::size_t i = 1; i < ps.size(); ++i) {
      // E S^q >= (E S^p)^(q/p), compared with interval slack
      const double lhs = est[i].upper;
      const double rhs = std::pow(std::max(est[i - 1].lower, 0.0), ps[i] / ps[i - 1]);
      // rounding slack for zero-width intervals
      r.check("jensen_" + label + "_" + format_double(ps[i]) + "_" + format_double(ps[i - 1]) + "[nu=" +
                  format_double(nu) + "]",
              lhs - rhs, -1e-12 * rhs, Sense::at_least);
    }
  }
  if (sups.size() < 2) return;
  for (double p : ps) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& [nu, s] : sups) {
      std::vector<double> x;
      for (double v : s) x.push_back(std::pow(v, p));
      const double m = mean(x);
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
    r.check("nu_ratio_" + label + "^" + format_double(p), hi / lo, prm.ratio_bound, Sense::at_most);
  }
}

inline void check_ensembles(const EnsembleSet& set, std::size_t min_paths, bool multiplicative) {
  if (set.empty()) throw std::invalid_argument("no ensembles supplied");
  for (const auto& e : set) {
    if (e.paths.size() < min_paths) {
      throw std::invalid_argument("ensemble has " + std::to_string(e.paths.size()) + " paths; at least " +
                                  std::to_string(min_paths) + " needed");
    }
    if (multiplicative && e.config.noise.kind != NoiseKind::multiplicative && e.config.noise.size() > 0) {
      throw std::invalid_argument("moment estimates need a multiplicative-noise ensemble");
    }
    for (const auto& tr : e.paths) require_complete(tr, "ensemble path");
  }
}

inline void describe(EstimateReport& r, const EnsembleSet& set, const MomentParams& prm) {
  std::vector<double> nus;
  for (const auto& e : set) nus.push_back(e.config.nu);
  r.input("nu_list", list_text(nus));
  r.input("paths", std::to_string(set.front().paths.size()));
  r.input("p_list", list_text(prm.p_list));
  r.input("ratio_bound", prm.ratio_bound);
  r.input("confidence", prm.level);
}

}  // namespace detail

// E sup_t |u|^p_{L2}.
inline EstimateReport moment_estimator(const EnsembleSet& set, const MomentParams& prm = {}) {
  detail::check_ensembles(set, prm.min_paths, true);
  EstimateReport r("moments");
  detail::describe(r, set, prm);
  std::vector<std::pair<double, std::vector<double>>> sups;
  for (const auto& e : set) {
    const double nu = e.config.nu;
    std::vector<double> s;
    for (const auto& tr : e.paths) s.push_back(detail::sup_velocity_l2(tr));
    sups.emplace_back(nu, std::move(s));
  }
  detail::moment_table(r, "sup_u_l2", sups, prm);
  return r;
}

// E sup_t |u|^p_{H1}.
inline EstimateReport enstrophy_moment_estimator(const EnsembleSet& set, const MomentParams& prm = {}) {
  detail::check_ensembles(set, prm.min_paths, true);
  EstimateReport r("enstrophy-moments");
  detail::describe(r, set, prm);
  std::vector<std::pair<double, std::vector<double>>> sups;
  for (const auto& e : set) {
    const double nu = e.config.nu;
    std::vector<double> s;
    for (const auto& tr : e.paths) s.push_back(detail::sup_h1(tr));
    sups.emplace_back(nu, std::move(s));
  }
  detail::moment_table(r, "sup_u_h1", sups, prm);
  return r;
}

// E sup_t |u|^p_{W^{1,q}} from the per-step sups tracked during the runs.
inline EstimateReport banach_moment_diagnostic(const EnsembleSet& set, const std::vector<double>& q_list,
                                               const MomentParams& prm = {}) {
  detail::check_ensembles(set, prm.min_paths, true);
  for (double q : q_list) {
    if (!(q >= 2.0 && q <= 16.0)) throw std::invalid_argument("W^{1,q} orders must lie in [2, 16]");
  }
  EstimateReport r("banach-moments");
  detail::describe(r, set, prm);
  r.input("q_list", detail::list_text(q_list));
  std::vector<double> qs = q_list;
  std::sort(qs.begin(), qs.end());
  std::map<double, std::map<double, std::vector<double>>> table;  // q -> nu -> E S^p per p
  for (double q : qs) {
    std::vector<std::pair<double, std::vector<double>>> sups;
    for (const auto& e : set) {
      const double nu = e.config.nu;
      const auto& orders = e.config.w1p_orders;
      const auto it = std::find(orders.begin(), orders.end(), q);
      if (it == orders.end()) throw std::invalid_argument("ensemble did not track W^{1," + format_double(q) + "}");
      const auto idx = static_cast<std::size_t>(it - orders.begin());
      std::vector<double> s;
      for (const auto& tr : e.paths) s.push_back(tr.w1p_sup[idx]);
      for (double p : prm.p_list) {
        std::vector<double> x;
        for (double v : s) x.push_back(std::pow(v, p));
        table[q][nu].push_back(mean(x));
      }
      sups.emplace_back(nu, std::move(s));
    }
    MomentParams local = prm;
    local.ratio_bound = std::numeric_limits<double>::infinity();  // no cross-nu claim here
    detail::moment_table(r, "sup_u_w1q[q=" + format_double(q) + "]", sups, local);
  }
  bool nested = true;
  for (std::size_t i = 1; i < qs.size(); ++i) {
    for (const auto& e : set) {
      const double nu = e.config.nu;
      for (std::size_t k = 0; k < prm.p_list.size(); ++k) nested = nested && table[qs[i]][nu][k] >= table[qs[i - 1]][nu][k];
    }
  }
  r.require("nondecreasing_in_q", nested);
  return r;
}

// ---------------------------------------------------------------------------

struct TightnessParams {
  double gamma = 0.4;
  double dual_order = 2.0;
  double ratio_bound = 2.0;
  bool decompose = true;
};

namespace detail {

struct Coefficients {
  std::vector<double> v;
  friend Coefficients operator-(const Coefficients& a, const Coefficients& b) {
    Coefficients d{a.v};
    for (std::size_t i = 0; i < d.v.size(); ++i) d.v[i] -= b.v[i];
    return d;
  }
};

inline double euclid(const Coefficients& c) {
  std::vector<double> sq(c.v.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = c.v[i] * c.v[i];
  return std::sqrt(pairwise_sum(sq));
}

// W^{gamma,2}(0,T; dual order s) norm of the velocity of a vorticity history.
inline double dual_fractional_norm(const PoissonSolver& solver, const TimeSeries<ScalarField>& betas,
                                   double gamma, double s) {
  TimeSeries<Coefficients> path;
  for (std::size_t k = 0; k < betas.size(); ++k) {
    path.push_back(betas.time(k), Coefficients{solver.dual_velocity_coefficients(betas[k], s)});
  }
  return fractional_time_norm(path, gamma, 2.0, euclid);
}

}  // namespace detail

inline const char* const j_term_names[5] = {"J1_initial", "J2_diffusion", "J3_advection", "J4_forcing", "J5_noise"};

// Norms of the five pieces beta = J1 + ... + J5 of one path.
inline std::vector<double> j_term_norms(const Trajectory& tr, const PoissonSolver& solver, double gamma, double s) {
  if (tr.decomposition.size() != tr.snapshots.size()) {
    throw std::invalid_argument("trajectory was run without the J decomposition");
  }
  std::vector<double> out;
  TimeSeries<ScalarField> j1;
  for (std::size_t k = 0; k < tr.snapshots.size(); ++k) j1.push_back(tr.snapshots.time(k), tr.snapshots[0]);
  out.push_back(detail::dual_fractional_norm(solver, j1, gamma, s));
  for (int term = 0; term < 4; ++term) {
    TimeSeries<ScalarField> j;
    for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
      const Decomposition& p = tr.decomposition[k];
      const ScalarField& f = term == 0 ? p.diffusion : term == 1 ? p.advection : term == 2 ? p.forcing : p.noise;
      j.push_back(tr.snapshots.time(k), f);
    }
    out.push_back(detail::dual_fractional_norm(solver, j, gamma, s));
  }
  return out;
}

inline EstimateReport tightness_diagnostic(const EnsembleSet& set, const TightnessParams& prm = {}) {
  if (!(prm.gamma > 0.0 && prm.gamma < 0.5)) throw std::invalid_argument("tightness order gamma must lie in (0, 1/2)");
  if (!(prm.dual_order > 0.0)) throw std::invalid_argument("dual order must be positive");
  detail::check_ensembles(set, 1, false);
  EstimateReport r("tightness");
  std::vector<double> nus;
  for (const auto& e : set) nus.push_back(e.config.nu);
  r.input("nu_list", detail::list_text(nus));
  r.input("paths", std::to_string(set.front().paths.size()));
  r.input("gamma", prm.gamma);
  r.input("dual_order", prm.dual_order);
  r.input("ratio_bound", prm.ratio_bound);
  std::vector<double> means;
  for (const auto& e : set) {
    const double nu = e.config.nu;
    const PoissonSolver solver{Grid(e.config.N)};
    std::vector<double> norms;
    std::vector<std::vector<double>> terms(5);
    for (const auto& tr : e.paths) {
      norms.push_back(detail::dual_fractional_norm(solver, tr.snapshots, prm.gamma, prm.dual_order));
      if (prm.decompose && e.config.record_decomposition) {
        const auto j = j_term_norms(tr, solver, prm.gamma, prm.dual_order);
        for (int k = 0; k < 5; ++k) terms[k].push_back(j[k]);
      }
    }
    means.push_back(mean(norms));
    r.measure(detail::tag("mean_norm", nu), means.back());
    r.measure(detail::tag("max_norm", nu), *std::max_element(norms.begin(), norms.end()));
    if (!terms[0].empty()) {
      for (int k = 0; k < 5; ++k) r.measure(detail::tag(std::string("mean_") + j_term_names[k], nu), mean(terms[k]));
    }
  }
  if (means.size() >= 2) {
    const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
    r.check("nu_ratio_mean_norm", *hi / *lo, prm.ratio_bound, Sense::at_most);
  } else {
    r.note("insufficient data: one viscosity, ratio not assessed");
  }
  return r;
}

}  // namespace eul2d
