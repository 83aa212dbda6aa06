#pragma once

// Commands behind the eul2d executable.
//
//   simulate   run the configured dynamics, write diag.csv, snap_<step>.fld
//              and manifest (path_<m>/ subdirectories when paths > 1)
//   experiment run one named estimate, write report.txt, report.csv, manifest
//   replay     re-execute a manifest serially in a scratch directory and
//              compare checksums against the record and the files on disk
//
// Exit codes: 0 pass, 1 experiment fail, 2 config, 3 numerical abort,
// 4 I/O, 5 replay mismatch.
//
// Relative output directories resolve against $EUL2D_OUTPUT_ROOT when set,
// otherwise the working directory.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <unistd.h>
#include <vector>

#include "eul2d/config.hpp"
#include "eul2d/dynamics.hpp"
#include "eul2d/elliptic.hpp"
#include "eul2d/errors.hpp"
#include "eul2d/field_io.hpp"
#include "eul2d/lab.hpp"
#include "eul2d/manifest.hpp"
#include "eul2d/noise.hpp"
#include "eul2d/report.hpp"

namespace eul2d::cli {

enum ExitCode : int { exit_pass = 0, exit_fail = 1, exit_config = 2, exit_numerical = 3, exit_io = 4, exit_mismatch = 5 };

struct Options {
  int threads = 1;
  std::filesystem::path out;  // replaces [output] directory when set
  std::ostream* log = &std::cerr;
};

struct Outcome {
  int code = exit_pass;
  std::string message;
  std::filesystem::path directory;
  std::optional<EstimateReport> report;
  std::vector<Trajectory> trajectories;  // simulate only
  std::vector<std::string> divergent;    // replay only
};

inline std::filesystem::path output_root() {
  if (const char* env = std::getenv("EUL2D_OUTPUT_ROOT"); env && *env) return env;
  return std::filesystem::current_path();
}

inline std::filesystem::path run_directory(const RunConfig& c, const Options& o) {
  std::filesystem::path d = o.out.empty() ? std::filesystem::path(c.directory) : o.out;
  if (d.is_relative()) d = output_root() / d;
  return d.lexically_normal();
}

namespace detail {

// Clears a previous run; refuses directories that do not look like one.
inline void prepare_directory(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec)) throw IoError(dir.string() + " exists and is not a directory");
    const bool empty = fs::is_empty(dir, ec);
    if (!empty && !fs::exists(dir / "manifest", ec)) {
      throw IoError("refusing to overwrite " + dir.string() + ": not empty and holds no manifest");
    }
    for (const auto& entry : fs::directory_iterator(dir, ec)) fs::remove_all(entry.path(), ec);
    if (ec) throw IoError("cannot clear " + dir.string() + ": " + ec.message());
  }
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

inline InitialVorticity initial_vorticity(const RunConfig& c) {
  if (c.initial_file.empty()) return c.initial;
  try {
    return read_scalar_field(c.initial_file);
  } catch (const FieldFormatError& e) {
    throw ConfigError(std::string("initial vorticity file: ") + e.what());
  }
}

inline std::string diag_csv(const Trajectory& tr) {
  std::string s = "step,t,energy,enstrophy,linf_vorticity,h1_u,cfl\n";
  for (const auto& d : tr.diagnostics) {
    s += std::to_string(d.step) + "," + format_double(d.t) + "," + format_double(d.energy) + "," +
         format_double(d.enstrophy) + "," + format_double(d.linf_vorticity) + "," + format_double(d.h1_u) + "," +
         format_double(d.cfl) + "\n";
  }
  return s;
}

inline void write_trajectory(const std::filesystem::path& dir, const Trajectory& tr, FieldEncoding enc) {
  write_bytes(dir / "diag.csv", diag_csv(tr));
  for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
    write_bytes(dir / ("snap_" + std::to_string(tr.snapshot_steps[k]) + ".fld"), encode_field(tr.snapshots[k], enc));
  }
}

inline void write_manifest(const std::filesystem::path& dir, RunManifest m, const RunConfig& effective,
                           std::chrono::steady_clock::time_point start) {
  m.files = inventory(dir);
  m.config = serialize_config(effective);
  m.master_seed = effective.master_seed;
  m.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_bytes(dir / "manifest", m.to_text());
}

inline RunConfig echo_config(RunConfig c, const Options& o) {
  if (!o.out.empty()) c.directory = o.out.string();
  return c;
}

// Maps exceptions onto exit codes.
template <typename F>
Outcome guarded(F&& body, std::ostream& log) {
  Outcome out;
  auto fail = [&](int code, const std::string& what) {
    out.code = code;
    out.message = what;
    log << "error: " << what << "\n";
  };
  try {
    out = body();
  } catch (const ConfigError& e) {
    fail(exit_config, e.what());
  } catch (const FieldFormatError& e) {
    fail(exit_config, e.what());
  } catch (const std::invalid_argument& e) {
    fail(exit_config, e.what());
  } catch (const NumericalError& e) {
    fail(exit_numerical, e.what());
  } catch (const IoError& e) {
    fail(exit_io, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    fail(exit_io, e.what());
  } catch (const std::exception& e) {
    fail(exit_fail, e.what());
  }
  return out;
}

// ---------------------------------------------------------------------------
// experiment dispatch

struct Job {
  EstimateReport report;
  std::uint64_t first_path = 0;
  std::size_t path_count = 0;
};

inline EnsembleSet ensembles(const RunConfig& c, SolverConfig base, int threads) {
  const auto& e = c.experiment;
  if (e.nu_list.empty()) throw std::invalid_argument("nu_list is empty");
  const InitialVorticity b0 = initial_vorticity(c);
  EnsembleSet set;
  for (double nu : e.nu_list) {
    base.nu = nu;
    set.push_back(run_ensemble(base, b0, e.paths, threads));
  }
  return set;
}

inline MomentParams moment_params(const RunConfig& c) {
  MomentParams p;
  p.p_list = c.experiment.p_list;
  p.ratio_bound = c.experiment.bound_factor;
  p.resamples = c.experiment.resamples;
  p.level = c.experiment.level;
  p.bootstrap_seed = c.master_seed;
  return p;
}

using Runner = std::function<Job(const RunConfig&, int threads)>;

inline const std::map<std::string, Runner>& experiments() {
  static const std::map<std::string, Runner> table = {
      {"uniform-nu",
       [](const RunConfig& c, int threads) {
         NuStudyParams p;
         p.nu_list = c.experiment.nu_list;
         p.bound_factor = c.experiment.bound_factor;
         return Job{uniform_in_nu_study(c.solver(), initial_vorticity(c), p, threads), c.path_index, 1};
       }},
      {"vv-limit",
       [](const RunConfig& c, int threads) {
         VanishingViscosityParams p;
         p.nu_list = c.experiment.nu_list;
         return Job{vanishing_viscosity_convergence(c.solver(), initial_vorticity(c), p, threads), c.path_index, 1};
       }},
      {"max-principle",
       [](const RunConfig& c, int) {
         MaxPrincipleParams p;
         p.epsilon = c.experiment.epsilon;
         return Job{maximum_principle_check(c.solver(), initial_vorticity(c), p), c.path_index, 1};
       }},
      {"kato",
       [](const RunConfig& c, int) {
         KatoParams p;
         p.p_list = c.experiment.p_list;
         p.samples = c.experiment.samples;
         p.N = c.N;
         p.kmax = c.experiment.band_limit;
         p.seed = c.master_seed;
         p.slope_bound = c.experiment.slope_bound;
         return Job{kato_constant_estimate(p), 0, 0};
       }},
      {"w1p",
       [](const RunConfig& c, int) {
         W1pParams p;
         p.p_list = c.experiment.p_list;
         p.slope_bound = c.experiment.slope_bound;
         return Job{w1p_growth_study(c.solver(), initial_vorticity(c), p), c.path_index, 1};
       }},
      {"yudovich",
       [](const RunConfig& c, int threads) {
         YudovichParams p;
         p.delta_list = c.experiment.delta_list;
         p.checkpoints = c.experiment.checkpoints;
         p.perturbation = c.experiment.perturbation;
         return Job{yudovich_stability(c.solver(), initial_vorticity(c), p, threads), c.path_index, 1};
       }},
      {"moments",
       [](const RunConfig& c, int threads) {
         return Job{moment_estimator(ensembles(c, c.solver(), threads), moment_params(c)), 0, c.experiment.paths};
       }},
      {"enstrophy-moments",
       [](const RunConfig& c, int threads) {
         return Job{enstrophy_moment_estimator(ensembles(c, c.solver(), threads), moment_params(c)), 0,
                    c.experiment.paths};
       }},
      {"banach-moments",
       [](const RunConfig& c, int threads) {
         SolverConfig base = c.solver();
         base.w1p_orders = c.experiment.q_list;
         return Job{banach_moment_diagnostic(ensembles(c, base, threads), c.experiment.q_list, moment_params(c)), 0,
                    c.experiment.paths};
       }},
      {"tightness",
       [](const RunConfig& c, int threads) {
         SolverConfig base = c.solver();
         base.record_decomposition = c.experiment.decompose;
         TightnessParams p;
         p.gamma = c.experiment.gamma;
         p.dual_order = c.experiment.dual_order;
         p.ratio_bound = c.experiment.bound_factor;
         p.decompose = c.experiment.decompose;
         return Job{tightness_diagnostic(ensembles(c, base, threads), p), 0, c.experiment.paths};
       }},
      {"weak-residual",
       [](const RunConfig& c, int threads) {
         SolverConfig base = c.solver();
         if (c.experiment.refine) {
           WeakRefinementParams p;
           p.test_modes = c.experiment.test_modes;
           return Job{weak_residual_refinement(base, initial_vorticity(c), p, threads), c.path_index, 1};
         }
         base.test_modes = c.experiment.test_modes;
         const Trajectory tr = run(base, initial_vorticity(c));
         eul2d::detail::require_complete(tr, "run");
         WeakResidualParams p;
         p.test_modes = c.experiment.test_modes;
         p.tolerance = c.experiment.tolerance;
         return Job{weak_residual_check(tr, p), c.path_index, 1};
       }},
      {"ito-check",
       [](const RunConfig& c, int threads) {
         ItoCheckParams p;
         p.gamma = c.experiment.gamma;
         p.p = c.experiment.p;
         p.paths = c.experiment.paths;
         p.time_points = c.experiment.time_points;
         p.T = c.T;
         p.integrand = c.experiment.integrand;
         p.tolerance = c.experiment.tolerance;
         p.seed = c.master_seed;
         p.threads = threads;
         return Job{ito_integral_fractional_check(p), 0, c.experiment.paths};
       }},
      {"g1-check",
       [](const RunConfig& c, int) {
         const MultiplicativeNoise noise =
             c.coefficients ? MultiplicativeNoise(*c.coefficients) : MultiplicativeNoise::standard(c.coefficient_count);
         return Job{verify_g1(noise, Grid(c.N), c.experiment.samples, c.master_seed), 0, 0};
       }},
      {"elliptic-convergence",
       [](const RunConfig& c, int) {
         EllipticConvergenceParams p;
         p.n_list.clear();
         for (double n : c.experiment.n_list) {
           if (n != std::floor(n) || n < 1) throw std::invalid_argument("n_list entries must be positive integers");
           p.n_list.push_back(static_cast<int>(n));
         }
         p.ratio_min = c.experiment.ratio_min;
         p.ratio_max = c.experiment.ratio_max;
         return Job{elliptic_convergence(p), 0, 0};
       }},
  };
  return table;
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline Outcome simulate(const RunConfig& cfg, const Options& opt = {}) {
  return detail::guarded(
      [&] {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        const SolverConfig base = cfg.solver();
        base.validate();
        const InitialVorticity b0 = detail::initial_vorticity(cfg);
        const std::size_t paths = std::max<std::size_t>(cfg.experiment.paths, 1);
        out.directory = run_directory(cfg, opt);
        detail::prepare_directory(out.directory);

        out.trajectories = parallel_map(paths, opt.threads, [&](std::size_t m) {
          SolverConfig c = base;
          c.path_index = base.path_index + m;
          return run(c, b0);
        });
        std::string status = "complete";
        for (std::size_t m = 0; m < paths; ++m) {
          const Trajectory& tr = out.trajectories[m];
          std::filesystem::path dir = out.directory;
          if (paths > 1) {
            dir /= "path_" + std::to_string(m);
            std::filesystem::create_directories(dir);
          }
          detail::write_trajectory(dir, tr, cfg.encoding);
          if (!tr.complete && status == "complete") {
            status = "incomplete";
            out.code = exit_numerical;
            out.message = "path " + std::to_string(m) + ": " + tr.error;
          }
        }
        RunManifest m;
        m.command = "simulate";
        m.first_path = cfg.path_index;
        m.path_count = paths;
        m.status = status;
        detail::write_manifest(out.directory, m, detail::echo_config(cfg, opt), start);
        if (out.code != exit_pass) *opt.log << "error: " << out.message << "\n";
        return out;
      },
      *opt.log);
}

inline Outcome experiment(const std::string& name, const RunConfig& cfg, const Options& opt = {}) {
  return detail::guarded(
      [&]() -> Outcome {
        const auto start = std::chrono::steady_clock::now();
        const auto& table = detail::experiments();
        const auto it = table.find(name);
        if (it == table.end()) throw ConfigError("unknown experiment '" + name + "'");
        if (cfg.experiment.name != name) {
          throw ConfigError("config is for experiment '" + cfg.experiment.name + "', not '" + name + "'");
        }
        Outcome out;
        out.directory = run_directory(cfg, opt);
        detail::prepare_directory(out.directory);
        detail::Job job = it->second(cfg, opt.threads);
        job.report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_bytes(out.directory / "report.txt", job.report.to_text());
        write_bytes(out.directory / "report.csv", job.report.to_csv());
        RunManifest m;
        m.command = "experiment";
        m.experiment = name;
        m.first_path = job.first_path;
        m.path_count = job.path_count;
        m.status = job.report.pass() ? "pass" : "fail";
        detail::write_manifest(out.directory, m, detail::echo_config(cfg, opt), start);
        out.code = job.report.pass() ? exit_pass : exit_fail;
        out.report = std::move(job.report);
        return out;
      },
      *opt.log);
}

inline Outcome simulate(const std::filesystem::path& config_path, const Options& opt = {}) {
  return detail::guarded([&] { return simulate(load_config(config_path), opt); }, *opt.log);
}

inline Outcome experiment(const std::string& name, const std::filesystem::path& config_path, const Options& opt = {}) {
  return detail::guarded([&] { return experiment(name, load_config(config_path, name), opt); }, *opt.log);
}

namespace detail {

inline std::filesystem::path scratch_directory() {
  namespace fs = std::filesystem;
  static int counter = 0;
  const fs::path base = fs::temp_directory_path();
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const fs::path p = base / ("eul2d-replay-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::error_code ec;
    if (fs::create_directory(p, ec)) return p;
  }
  throw IoError("cannot create a scratch directory under " + base.string());
}

inline void compare(const std::map<std::string, std::uint64_t>& recorded, const std::map<std::string, std::uint64_t>& got,
                    const std::string& label, std::vector<std::string>& divergent) {
  for (const auto& [name, sum] : recorded) {
    const auto it = got.find(name);
    if (it == got.end()) divergent.push_back(name + " (missing " + label + ")");
    else if (it->second != sum) divergent.push_back(name + " (" + label + " checksum " + hex64(it->second) + " != " + hex64(sum) + ")");
  }
  for (const auto& [name, sum] : got) {
    if (!recorded.count(name)) divergent.push_back(name + " (unrecorded " + label + " file)");
  }
}

}  // namespace detail

// Serial re-execution; both the fresh artifacts and the files next to the
// manifest must match the recorded checksums.
inline Outcome replay(const std::filesystem::path& manifest_path, const Options& opt = {}) {
  return detail::guarded(
      [&]() -> Outcome {
        const RunManifest rec = RunManifest::parse(read_bytes(manifest_path));
        const RunConfig cfg = parse_config(rec.config);
        const std::filesystem::path scratch = detail::scratch_directory();
        Options serial;
        serial.threads = 1;
        serial.out = scratch;
        std::ostringstream quiet;
        serial.log = &quiet;
        Outcome fresh;
        if (rec.command == "simulate") {
          fresh = simulate(cfg, serial);
        } else if (rec.command == "experiment") {
          fresh = experiment(rec.experiment, cfg, serial);
        } else {
          std::filesystem::remove_all(scratch);
          throw ConfigError("manifest: unknown command '" + rec.command + "'");
        }
        Outcome out;
        out.directory = std::filesystem::absolute(manifest_path).parent_path();
        if (fresh.code == exit_config || fresh.code == exit_io) {
          std::filesystem::remove_all(scratch);
          out.code = fresh.code;
          out.message = "re-execution failed: " + fresh.message;
          *opt.log << "error: " << out.message << "\n";
          return out;
        }
        detail::compare(rec.files, inventory(scratch), "replayed", out.divergent);
        detail::compare(rec.files, inventory(out.directory), "on-disk", out.divergent);
        std::filesystem::remove_all(scratch);
        if (!out.divergent.empty()) {
          out.code = exit_mismatch;
          out.message = std::to_string(out.divergent.size()) + " divergent file(s)";
          *opt.log << "replay mismatch in " << out.directory.string() << ":\n";
          for (const auto& d : out.divergent) *opt.log << "  " << d << "\n";
        }
        out.report = std::move(fresh.report);
        return out;
      },
      *opt.log);
}

}  // namespace eul2d::cli
