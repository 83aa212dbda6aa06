#pragma once

// Vorticity-form time stepping on the unit square.
//
// Additive noise: the state is beta, advanced through z = beta - curl W,
//   z_t + (u.grad) z = nu Delta z + g,  g = curl f - (u.grad) curl W + nu Delta curl W,
// with u recovered from beta at every stage. curl W is linear in time inside a
// step. Advection and g go through SSP-RK3, diffusion through the exact heat
// semigroup, and beta' = z' + curl W(t + dt).
//
// Multiplicative noise: RK3 for advection and forcing, then the Ito term
// sum_i (c^i beta + grad c^i ^ u) dbeta_i evaluated at the left end, then
// diffusion.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "eul2d/elliptic.hpp"
#include "eul2d/errors.hpp"
#include "eul2d/field.hpp"
#include "eul2d/noise.hpp"
#include "eul2d/norms.hpp"
#include "eul2d/operators.hpp"
#include "eul2d/rk3.hpp"
#include "eul2d/rng.hpp"
#include "eul2d/sine_series.hpp"

namespace eul2d {

enum class NoiseKind { none, additive, multiplicative };

inline NoiseKind parse_noise_kind(std::string_view s) {
  if (s == "none") return NoiseKind::none;
  if (s == "additive") return NoiseKind::additive;
  if (s == "multiplicative") return NoiseKind::multiplicative;
  throw std::invalid_argument("unknown noise kind '" + std::string(s) + "'");
}

inline std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::none: return "none";
    case NoiseKind::additive: return "additive";
    case NoiseKind::multiplicative: return "multiplicative";
  }
  return "none";
}

struct NoiseModel {
  NoiseKind kind = NoiseKind::none;
  AdditiveNoise additive;
  MultiplicativeNoise multiplicative;

  // Number of driving Brownian motions.
  std::size_t size() const {
    switch (kind) {
      case NoiseKind::additive: return additive.size();
      case NoiseKind::multiplicative: return multiplicative.size();
      default: return 0;
    }
  }
  bool operator==(const NoiseModel&) const = default;
};

struct SolverConfig {
  int N = 64;
  double dt = 1e-3;
  double T = 1.0;
  double nu = 0.0;
  AdvectionScheme advection = AdvectionScheme::arakawa;
  NoiseModel noise;
  SineSeries forcing_curl;  // curl f
  double cfl_safety = 0.5;
  std::uint64_t master_seed = 0;
  std::uint64_t path_index = 0;
  int snapshot_stride = 10;
  int test_modes = 0;               // weak-form pairings recorded per step
  bool record_decomposition = false;  // cumulative J-terms at snapshots
  std::vector<double> w1p_orders;     // sup_t |u|_{W^{1,p}} tracked over every step

  std::size_t steps() const { return step_count(T, dt); }

  void validate() const {
    Grid g(N);
    if (!(nu >= 0.0) || !std::isfinite(nu)) throw std::invalid_argument("viscosity must be finite and >= 0");
    (void)steps();
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw std::invalid_argument("cfl_safety must lie in (0, 1]");
    if (snapshot_stride < 1) throw std::invalid_argument("snapshot_stride must be >= 1");
    if (test_modes < 0) throw std::invalid_argument("test_modes must be >= 0");
    for (double p : w1p_orders) {
      if (!(p >= 1.0)) throw std::invalid_argument("W^{1,p} orders must be >= 1");
    }
  }
};

// Brownian values W_m(t_n), one row per driving motion.
struct NoiseRecord {
  std::vector<std::vector<double>> paths;

  std::size_t modes() const { return paths.size(); }
  std::size_t steps() const { return paths.empty() ? 0 : paths.front().size() - 1; }

  std::vector<double> values(std::size_t n) const {
    std::vector<double> v(paths.size());
    for (std::size_t m = 0; m < paths.size(); ++m) v[m] = paths[m][n];
    return v;
  }
  std::vector<double> increments(std::size_t n) const {
    std::vector<double> v(paths.size());
    for (std::size_t m = 0; m < paths.size(); ++m) v[m] = paths[m][n + 1] - paths[m][n];
    return v;
  }
  bool operator==(const NoiseRecord&) const = default;
};

// One Brownian motion per mode from stream path_index * 1024 + mode.
inline NoiseRecord sample_noise_record(const SolverConfig& cfg) {
  NoiseRecord r;
  for (std::size_t m = 0; m < cfg.noise.size(); ++m) {
    RngStream rng(cfg.master_seed, stream_id(cfg.path_index, m));
    r.paths.push_back(sample_brownian_path(rng, cfg.T, cfg.dt).entries());
  }
  return r;
}

struct StepDiagnostics {
  std::size_t step = 0;
  double t = 0.0;
  double energy = 0.0;     // (1/2) <psi, beta>
  double enstrophy = 0.0;  // (1/2) |beta|^2
  double linf_vorticity = 0.0;
  double h1_u = 0.0;
  double cfl = 0.0;
};

// Quantities of the z-equation for one additive step.
struct AdditiveStepRecord {
  double g_integral = 0.0;  // dt * sum_s w_s |g_s|_inf over the RK3 stages
  double linf_z = 0.0;      // |z_{n+1}|_inf
  double max_z = 0.0;
  double min_z = 0.0;
  double advected_curl_w = 0.0;  // max over stages of |(u.grad) curl W|_inf
};

// Cumulative pieces of beta(t) - beta(0): diffusion, advection, forcing, noise.
struct Decomposition {
  ScalarField diffusion, advection, forcing, noise;
  explicit Decomposition(const Grid& g) : diffusion(g), advection(g), forcing(g), noise(g) {}
};

// Per-step pairings with the test streamfunctions psi_m.
struct WeakRecord {
  std::vector<SineTerm> modes;
  std::vector<std::vector<double>> pairing;  // <beta_n, psi_m>, steps+1 rows
  std::vector<std::vector<double>> drift;    // drift_n, steps rows
  std::vector<std::vector<double>> noise;    // noise pairing over [t_n, t_{n+1}]
  std::vector<std::vector<double>> viscous;  // lambda_m <beta_n, psi_m>
};

struct Trajectory {
  SolverConfig config;
  TimeSeries<ScalarField> snapshots;
  std::vector<std::size_t> snapshot_steps;
  std::vector<StepDiagnostics> diagnostics;
  NoiseRecord noise;
  std::vector<AdditiveStepRecord> additive;
  WeakRecord weak;
  std::vector<Decomposition> decomposition;  // aligned with snapshots
  std::vector<double> w1p_sup;               // aligned with config.w1p_orders
  bool complete = false;
  std::string error;

  const ScalarField& final_state() const { return snapshots[snapshots.size() - 1]; }
};

// Test streamfunctions: the first `count` sine modes ordered by k^2 + l^2, then k.
inline std::vector<SineTerm> test_mode_list(int count) {
  std::vector<SineTerm> all;
  for (int k = 1; k <= 16; ++k) {
    for (int l = 1; l <= 16; ++l) all.push_back({1.0, k, l});
  }
  std::stable_sort(all.begin(), all.end(), [](const SineTerm& a, const SineTerm& b) {
    return std::pair{a.k * a.k + a.l * a.l, a.k} < std::pair{b.k * b.k + b.l * b.l, b.k};
  });
  all.resize(static_cast<std::size_t>(std::clamp(count, 0, 256)));
  return all;
}

// Operators and precomputed fields shared by every step of a run.
class Dynamics {
 public:
  explicit Dynamics(const SolverConfig& cfg)
      : cfg_((cfg.validate(), cfg)),
        grid_(cfg.N),
        solver_(grid_),
        forcing_(cfg.forcing_curl.sample(grid_)),
        has_forcing_(!cfg.forcing_curl.empty()),
        additive_(grid_, cfg.noise.kind == NoiseKind::additive ? cfg.noise.additive : AdditiveNoise()),
        multiplicative_(grid_, cfg.noise.kind == NoiseKind::multiplicative ? cfg.noise.multiplicative
                                                                           : MultiplicativeNoise()) {
    test_modes_ = test_mode_list(cfg.test_modes);
    for (const auto& m : test_modes_) {
      const SineSeries s({m});
      test_psi_.push_back(s.sample(grid_));
      test_dx_.push_back(ScalarField::sample(grid_, [&](double x, double y) { return s.dx(x, y); }));
      test_dy_.push_back(ScalarField::sample(grid_, [&](double x, double y) { return s.dy(x, y); }));
    }
  }

  const SolverConfig& config() const { return cfg_; }
  const Grid& grid() const { return grid_; }
  const PoissonSolver& solver() const { return solver_; }
  const ScalarField& forcing() const { return forcing_; }

  VectorField velocity(const ScalarField& beta) const { return recover_velocity(beta, solver_); }

  StepDiagnostics diagnose(const ScalarField& beta, const VectorField& u, std::size_t step) const {
    StepDiagnostics d;
    d.step = step;
    d.t = static_cast<double>(step) * cfg_.dt;
    d.energy = 0.5 * inner(*u.stream(), beta);
    d.enstrophy = 0.5 * inner(beta, beta);
    d.linf_vorticity = linf_norm(beta);
    d.h1_u = h1_norm(u);
    d.cfl = cfl_number(u, cfg_.dt);
    return d;
  }

  ScalarField curl_w(std::span<const double> w) const { return additive_.curl(grid_, w); }

  // One additive (or noise-free) step from beta at W-values w0 to w1. u0, if
  // given, must be velocity(beta); it serves the CFL check and the first stage.
  ScalarField step_additive(const ScalarField& beta, std::span<const double> w0, std::span<const double> w1,
                            AdditiveStepRecord* rec = nullptr, const VectorField* u0 = nullptr) const {
    const double dt = cfg_.dt;
    const bool noisy = additive_.size() > 0;
    std::optional<VectorField> own;
    if (u0 == nullptr) u0 = &own.emplace(velocity(beta));
    check_cfl(*u0, dt, cfg_.cfl_safety);
    std::optional<ScalarField> c0, dc;
    ScalarField z = beta;
    if (noisy) {
      c0 = curl_w(w0);
      dc = curl_w(w1);
      *dc -= *c0;
      z -= *c0;
    }
    double g_sup[3] = {0, 0, 0};
    double adv_c = 0.0;
    int stage = 0;
    auto rhs = [&](const ScalarField& zs, double theta) {
      ScalarField b = zs;
      std::optional<ScalarField> c;
      if (noisy) {
        c = *c0;
        c->axpy(theta, *dc);
        b += *c;
      }
      std::optional<VectorField> us;
      const VectorField& u = stage == 0 ? *u0 : us.emplace(velocity(b));
      ScalarField g = has_forcing_ ? forcing_ : ScalarField(grid_);
      if (noisy) {
        const ScalarField a = advect(u, *c, cfg_.advection);
        adv_c = std::max(adv_c, linf_norm(a));
        g -= a;
        if (cfg_.nu > 0.0) g.axpy(cfg_.nu, laplacian(*c));
      }
      g_sup[stage++] = linf_norm(g);
      g -= advect(u, zs, cfg_.advection);
      return g;
    };
    ScalarField next = solver_.heat(ssp_rk3(z, dt, rhs), cfg_.nu * dt);
    if (rec != nullptr) {
      rec->g_integral = dt * (rk3_weights[0] * g_sup[0] + rk3_weights[1] * g_sup[1] + rk3_weights[2] * g_sup[2]);
      rec->linf_z = linf_norm(next);
      rec->max_z = *std::max_element(next.values().begin(), next.values().end());
      rec->min_z = *std::min_element(next.values().begin(), next.values().end());
      rec->advected_curl_w = adv_c;
    }
    if (noisy) {
      next += *c0;
      next += *dc;
    }
    if (!next.all_finite()) throw NumericalError("vorticity became non-finite");
    return next;
  }

  // One multiplicative step with increments dbeta; fills decomposition
  // increments when requested.
  ScalarField step_multiplicative(const ScalarField& beta, std::span<const double> dbeta,
                                  Decomposition* parts = nullptr, const VectorField* u0 = nullptr) const {
    const double dt = cfg_.dt;
    std::optional<VectorField> own;
    if (u0 == nullptr) u0 = &own.emplace(velocity(beta));
    check_cfl(*u0, dt, cfg_.cfl_safety);
    bool first = true;
    auto rhs = [&](const ScalarField& b, double) {
      ScalarField g = has_forcing_ ? forcing_ : ScalarField(grid_);
      g -= first ? advect(*u0, b, cfg_.advection) : advect(velocity(b), b, cfg_.advection);
      first = false;
      return g;
    };
    ScalarField transported = ssp_rk3(beta, dt, rhs);
    if (parts != nullptr) {
      ScalarField adv = transported - beta;
      if (has_forcing_) adv.axpy(-dt, forcing_);
      parts->advection += adv;
      if (has_forcing_) parts->forcing.axpy(dt, forcing_);
    }
    if (multiplicative_.size() > 0 && multiplicative_.any_active()) {
      const ScalarField kick = multiplicative_.curl_increment(beta, *u0, dbeta);
      transported += kick;
      if (parts != nullptr) parts->noise += kick;
    }
    ScalarField next = solver_.heat(transported, cfg_.nu * dt);
    if (parts != nullptr) parts->diffusion += next - transported;
    if (!next.all_finite()) throw NumericalError("vorticity became non-finite");
    return next;
  }

  // Weak-form pairings of the state at step n; noise pairing for [t_n, t_{n+1}].
  void record_pairings(const ScalarField& beta, WeakRecord& w) const {
    std::vector<double> pair, viscous;
    for (std::size_t m = 0; m < test_psi_.size(); ++m) {
      const double p = inner(beta, test_psi_[m]);
      pair.push_back(p);
      viscous.push_back(test_modes_[m].eigenvalue() * p);
    }
    w.pairing.push_back(std::move(pair));
    w.viscous.push_back(std::move(viscous));
  }

  // <beta, u.grad psi_m> + <curl f, psi_m> - nu lambda_m <beta, psi_m>
  std::vector<double> drift(const ScalarField& beta, const VectorField& u) const {
    std::vector<double> out;
    for (std::size_t m = 0; m < test_psi_.size(); ++m) {
      ScalarField prod(grid_);
      auto a = prod.values();
      const auto b = beta.values(), u1 = u.u1().values(), u2 = u.u2().values();
      const auto px = test_dx_[m].values(), py = test_dy_[m].values();
      for (std::size_t q = 0; q < a.size(); ++q) a[q] = b[q] * (u1[q] * px[q] + u2[q] * py[q]);
      const Padded pp = prod.padded();
      double d = detail::trapezoid(grid_, [&](int i, int j) { return pp.at(i, j); });
      if (has_forcing_) d += inner(forcing_, test_psi_[m]);
      d -= cfg_.nu * test_modes_[m].eigenvalue() * inner(beta, test_psi_[m]);
      out.push_back(d);
    }
    return out;
  }

  std::vector<double> noise_pairing(const ScalarField& beta, const VectorField& u, std::span<const double> w0,
                                    std::span<const double> w1, std::span<const double> dbeta) const {
    std::vector<double> out(test_psi_.size(), 0.0);
    std::optional<ScalarField> kick;
    if (additive_.size() > 0) {
      kick = curl_w(w1);
      *kick -= curl_w(w0);
    } else if (multiplicative_.size() > 0 && multiplicative_.any_active()) {
      kick = multiplicative_.curl_increment(beta, u, dbeta);
    }
    if (kick) {
      for (std::size_t m = 0; m < test_psi_.size(); ++m) out[m] = inner(*kick, test_psi_[m]);
    }
    return out;
  }

 private:
  SolverConfig cfg_;
  Grid grid_;
  PoissonSolver solver_;
  ScalarField forcing_;
  bool has_forcing_;
  AdditiveBasis additive_;
  MultiplicativeBasis multiplicative_;
  std::vector<SineTerm> test_modes_;
  std::vector<ScalarField> test_psi_, test_dx_, test_dy_;
};

// Free-function forms of the two steppers.
inline ScalarField step_additive(const Dynamics& dyn, const ScalarField& beta, std::span<const double> w0,
                                 std::span<const double> w1, AdditiveStepRecord* rec = nullptr) {
  return dyn.step_additive(beta, w0, w1, rec);
}

inline ScalarField step_multiplicative(const Dynamics& dyn, const ScalarField& beta, std::span<const double> dbeta,
                                       Decomposition* parts = nullptr) {
  return dyn.step_multiplicative(beta, dbeta, parts);
}

// Full run with a given noise record. A step failure ends the run with the
// trajectory marked incomplete; everything recorded so far is kept.
inline Trajectory run(const SolverConfig& cfg, const ScalarField& beta0, NoiseRecord record) {
  Dynamics dyn(cfg);
  const std::size_t steps = cfg.steps();
  if (record.modes() != cfg.noise.size()) throw std::invalid_argument("noise record does not match the noise model");
  if (record.modes() > 0 && record.steps() != steps) throw std::invalid_argument("noise record has the wrong length");
  if (!(beta0.grid() == dyn.grid())) throw std::invalid_argument("initial vorticity grid does not match N");
  if (!beta0.all_finite()) throw std::invalid_argument("initial vorticity is not finite");

  Trajectory tr;
  tr.config = cfg;
  tr.noise = std::move(record);
  tr.weak.modes = test_mode_list(cfg.test_modes);
  const bool multiplicative = cfg.noise.kind == NoiseKind::multiplicative;
  const bool additive = cfg.noise.kind == NoiseKind::additive;
  const std::vector<double> no_noise;

  ScalarField beta = beta0;
  beta.set_extension(Extension::dirichlet());
  std::optional<Decomposition> parts;
  if (cfg.record_decomposition) parts.emplace(dyn.grid());

  auto snapshot = [&](std::size_t n) {
    tr.snapshots.push_back(static_cast<double>(n) * cfg.dt, beta);
    tr.snapshot_steps.push_back(n);
    if (parts) tr.decomposition.push_back(*parts);
  };

  tr.w1p_sup.assign(cfg.w1p_orders.size(), 0.0);
  auto observe = [&](const VectorField& u, std::size_t n) {
    tr.diagnostics.push_back(dyn.diagnose(beta, u, n));
    for (std::size_t k = 0; k < cfg.w1p_orders.size(); ++k) {
      tr.w1p_sup[k] = std::max(tr.w1p_sup[k], w1p_norm(u, cfg.w1p_orders[k]));
    }
  };

  VectorField u = dyn.velocity(beta);
  observe(u, 0);
  snapshot(0);
  try {
    for (std::size_t n = 0; n < steps; ++n) {
      const auto w0 = additive ? tr.noise.values(n) : no_noise;
      const auto w1 = additive ? tr.noise.values(n + 1) : no_noise;
      const auto db = multiplicative ? tr.noise.increments(n) : no_noise;
      if (cfg.test_modes > 0) {
        dyn.record_pairings(beta, tr.weak);
        tr.weak.drift.push_back(dyn.drift(beta, u));
        tr.weak.noise.push_back(dyn.noise_pairing(beta, u, w0, w1, db));
      }
      if (multiplicative) {
        beta = dyn.step_multiplicative(beta, db, parts ? &*parts : nullptr, &u);
      } else {
        AdditiveStepRecord rec;
        const ScalarField before = beta;
        beta = dyn.step_additive(beta, w0, w1, &rec, &u);
        tr.additive.push_back(rec);
        if (parts) {
          // split as in the multiplicative case: noise = curl W increment, rest advection
          ScalarField rest = beta - before;
          if (additive) {
            ScalarField kick = dyn.curl_w(w1) - dyn.curl_w(w0);
            parts->noise += kick;
            rest -= kick;
          }
          parts->advection += rest;
        }
      }
      u = dyn.velocity(beta);
      observe(u, n + 1);
      if ((n + 1) % static_cast<std::size_t>(cfg.snapshot_stride) == 0 || n + 1 == steps) snapshot(n + 1);
    }
    if (cfg.test_modes > 0) dyn.record_pairings(beta, tr.weak);
    tr.complete = true;
  } catch (const NumericalError& e) {
    tr.error = e.what();
    const std::size_t last = tr.diagnostics.back().step;
    if (tr.snapshot_steps.back() != last) snapshot(last);
  }
  return tr;
}

inline Trajectory run(const SolverConfig& cfg, const ScalarField& beta0) {
  cfg.validate();
  return run(cfg, beta0, sample_noise_record(cfg));
}

inline Trajectory run(const SolverConfig& cfg, const SineSeries& beta0) {
  cfg.validate();
  return run(cfg, beta0.sample(Grid(cfg.N)));
}

// Initial vorticity as an analytic sine series or a stored field.
using InitialVorticity = std::variant<SineSeries, ScalarField>;

inline ScalarField sample_initial(const InitialVorticity& init, const Grid& g) {
  if (const auto* s = std::get_if<SineSeries>(&init)) return s->sample(g);
  const auto& f = std::get<ScalarField>(init);
  if (!(f.grid() == g)) {
    throw std::invalid_argument("stored initial vorticity has N = " + std::to_string(f.grid().n()) +
                                ", run needs N = " + std::to_string(g.n()));
  }
  ScalarField out = f;
  out.set_extension(Extension::dirichlet());
  return out;
}

inline Trajectory run(const SolverConfig& cfg, const InitialVorticity& beta0) {
  cfg.validate();
  return run(cfg, sample_initial(beta0, Grid(cfg.N)));
}

}  // namespace eul2d
