#pragma once

// Acceptance suite: fourteen criteria, each driven through the CLI layer so
// every run leaves a manifest; the last criterion replays all of them.
// Used by the acceptance test binary and by `eul2d validate`.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "eul2d/cli.hpp"

namespace eul2d::acceptance {

struct Result {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

inline bool all_passed(const std::vector<Result>& r) {
  for (const auto& x : r) {
    if (!x.pass) return false;
  }
  return !r.empty();
}

namespace detail {

// Config text from per-section bodies.
inline std::string ini(const std::string& grid, const std::string& time, const std::string& physics,
                       const std::string& noise, const std::string& experiment = {}) {
  return "[grid]\n" + grid + "\n[time]\n" + time + "\n[physics]\n" + physics + "\n[noise]\n" + noise +
         "\n[experiment]\n" + experiment + "\n";
}

inline const char* const two_mode = "initial = 1*sin(1,1) + 0.3*sin(2,1)\n";

class Suite {
 public:
  Suite(std::filesystem::path root, int threads, std::ostream& out) : root_(std::move(root)), threads_(threads), out_(out) {}

  cli::Outcome simulate(const std::string& tag, const std::string& text) {
    RunConfig c = parse_config(text);
    return keep(cli::simulate(c, options(tag)));
  }

  cli::Outcome experiment(const std::string& tag, const std::string& name, const std::string& text) {
    RunConfig c = parse_config(text, {}, name);
    return keep(cli::experiment(name, c, options(tag)));
  }

  void record(Result r) {
    out_ << (r.pass ? "PASS" : "FAIL") << "  criterion " << std::setw(2) << r.id << "  " << r.title << ": " << r.detail
         << "  [" << std::fixed << std::setprecision(1) << r.seconds << " s]" << std::defaultfloat << "\n";
    out_.flush();
    results_.push_back(std::move(r));
  }

  const std::vector<std::filesystem::path>& manifests() const { return manifests_; }
  std::vector<Result>& results() { return results_; }

 private:
  cli::Options options(const std::string& tag) {
    cli::Options o;
    o.threads = threads_;
    o.out = root_ / tag;
    o.log = &out_;
    return o;
  }
  cli::Outcome keep(cli::Outcome o) {
    if (!o.directory.empty() && std::filesystem::exists(o.directory / "manifest")) manifests_.push_back(o.directory / "manifest");
    return o;
  }

  std::filesystem::path root_;
  int threads_;
  std::ostream& out_;
  std::vector<std::filesystem::path> manifests_;
  std::vector<Result> results_;
};

inline std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(4) << v;
  return s.str();
}

inline double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

inline std::string failure(const cli::Outcome& o) {
  if (o.report) {
    std::string s;
    for (const auto& m : o.report->measurements()) {
      if (m.checked && !m.pass) s += (s.empty() ? "" : ", ") + m.quantity + "=" + num(m.value) + " vs " + num(m.bound);
    }
    if (!s.empty()) return "violated " + s;
  }
  return "exit " + std::to_string(o.code) + (o.message.empty() ? "" : " (" + o.message + ")");
}

// Value of a measurement; NaN when the run produced no report.
inline double measured(const cli::Outcome& o, const std::string& q) {
  return o.report ? o.report->value(q) : std::numeric_limits<double>::quiet_NaN();
}

inline std::string runtime_note(double s, double limit) { return "runtime " + num(s) + " s (limit " + num(limit) + " s)"; }

// ---------------------------------------------------------------------------

inline void elliptic(Suite& s) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto o = s.experiment("c01_elliptic", "elliptic-convergence",
                              "[experiment]\nn_list = 64, 128\nratio_min = 3.5\nratio_max = 4.5\n");
  const double secs = seconds_since(t0);
  const double ratio = measured(o, "error_l2[N=64]") / measured(o, "error_l2[N=128]");
  const bool ok = o.code == cli::exit_pass && secs < 5.0;
  s.record({1, "elliptic convergence", ok, "L2 velocity error ratio " + num(ratio) + " in [3.5, 4.5], " + runtime_note(secs, 5), secs});
}

inline void conservation(Suite& s) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto o = s.simulate("c02_conservation", ini("N = 128", "dt = 0.001\nT = 1\nsnapshot_stride = 100",
                                                    std::string("nu = 0\nadvection = arakawa\n") + two_mode, "kind = none"));
  const double secs = seconds_since(t0);
  if (o.code != cli::exit_pass) {
    s.record({2, "energy and enstrophy conservation", false, failure(o), secs});
    return;
  }
  const auto& d = o.trajectories.front().diagnostics;
  double de = 0.0, dz = 0.0;
  for (const auto& x : d) {
    de = std::max(de, std::abs(x.energy - d.front().energy) / d.front().energy);
    dz = std::max(dz, std::abs(x.enstrophy - d.front().enstrophy) / d.front().enstrophy);
  }
  const bool ok = de <= 1e-5 && dz <= 1e-5 && secs < 60.0;
  s.record({2, "energy and enstrophy conservation", ok,
            "max relative drift energy " + num(de) + ", enstrophy " + num(dz) + " (<= 1e-05), " + runtime_note(secs, 60), secs});
}

inline void eigenmode(Suite& s) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto o = s.simulate("c03_eigenmode", ini("N = 128", "dt = 0.001\nT = 1\nsnapshot_stride = 100",
                                                 "nu = 0\nadvection = arakawa\ninitial = 1*sin(1,1)\n", "kind = none"));
  const double secs = seconds_since(t0);
  if (o.code != cli::exit_pass) {
    s.record({3, "stationary eigenmode", false, failure(o), secs});
    return;
  }
  const Trajectory& tr = o.trajectories.front();
  const double rel = lp_norm(tr.final_state() - tr.snapshots[0], 2.0) / lp_norm(tr.snapshots[0], 2.0);
  s.record({3, "stationary eigenmode", rel <= 1e-6, "|beta(T) - beta0| / |beta0| = " + num(rel) + " (<= 1e-06)", secs});
}

inline const char* const additive_run = "nu = 0\nadvection = arakawa\n";

inline void uniform_nu(Suite& s) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto o = s.experiment("c04_uniform_nu", "uniform-nu",
                              ini("N = 64", "dt = 0.002\nT = 1\nsnapshot_stride = 50", std::string(additive_run) + two_mode,
                                  "kind = additive\nsigma0 = 1\nmaster_seed = 7", "nu_list = 0.01, 0.001, 0.0001\nbound_factor = 2"));
  const double secs = seconds_since(t0);
  const bool ok = o.code == cli::exit_pass && secs < 300.0;
  s.record({4, "uniform-in-nu enstrophy", ok,
            (o.report ? "ratio " + num(measured(o, "ratio_beta_l2")) + " (<= 2), " : failure(o) + ", ") + runtime_note(secs, 300), secs});
}

inline void vanishing_viscosity(Suite& s) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto o = s.experiment("c05_vv_limit", "vv-limit",
                              ini("N = 64", "dt = 0.002\nT = 1\nsnapshot_stride = 10", std::string(additive_run) + two_mode,
                                  "kind = additive\nsigma0 = 1\nmaster_seed = 7", "nu_list = 0.01, 0.0025, 0.000625"));
  const double secs = seconds_since(t0);
  std::string d;
  if (o.report) {
    for (double nu : {0.01, 0.0025, 0.000625}) d += num(measured(o, eul2d::detail::tag("dist_to_euler", nu))) + " ";
    d = "distances " + d + "; nu a(u,phi1) ";
    for (double nu : {0.01, 0.0025, 0.000625}) d += num(measured(o, eul2d::detail::tag("max_nu_a_phi1", nu))) + " ";
  }
  const bool ok = o.code == cli::exit_pass && secs < 600.0;
  s.record({5, "vanishing viscosity", ok, (ok ? d : failure(o) + " " + d) + "; " + runtime_note(secs, 600), secs});
}

inline void maximum_principle(Suite& s) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string physics = std::string("nu = 0\nadvection = upwind\nforcing_curl = none\n") + two_mode;
  const auto a = s.experiment("c06_max_principle_noise_off", "max-principle",
                              ini("N = 64", "dt = 0.002\nT = 1\nsnapshot_stride = 50", physics, "kind = none", "epsilon = 0.001"));
  const auto b = s.experiment("c06_max_principle_additive", "max-principle",
                              ini("N = 64", "dt = 0.002\nT = 1\nsnapshot_stride = 50", physics,
                                  "kind = additive\nsigma0 = 1\nmaster_seed = 7", "epsilon = 0.001"));
  const double secs = seconds_since(t0);
  const double z0 = measured(a, "z0_linf"), sup = measured(a, "sup_z_linf");
  const bool homogeneous = sup <= z0 * (1.0 + 1e-3);
  const bool ok = homogeneous && a.code == cli::exit_pass && b.code == cli::exit_pass;
  std::string d = "noise off: sup|beta| " + num(sup) + " <= " + num(z0 * (1.0 + 1e-3)) + "; additive: excess " +
                  num(measured(b, "excess_over_bound"));
  if (!ok) d += " [" + failure(a.code != cli::exit_pass ? a : b) + "]";
  s.record({6, "maximum principle", ok, d, secs});
}

inline void kato(Suite& s) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto o = s.experiment("c07_kato", "kato", "[grid]\nN = 128\n[experiment]\np_list = 2, 4, 8, 16, 32\nsamples = 100\nslope_bound = 0.6\n");
  const double secs = seconds_since(t0);
  s.record({7, "Kato inequality growth", o.code == cli::exit_pass, "fitted exponent " + num(measured(o, "slope")) + " (<= 0.6)", secs});
}

inline void w1p(Suite& s) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto o = s.experiment("c08_w1p", "w1p",
                              ini("N = 64", "dt = 0.002\nT = 1\nsnapshot_stride = 50", std::string(additive_run) + two_mode,
                                  "kind = additive\nsigma0 = 1\nmaster_seed = 7", "p_list = 2, 4, 8, 16\nslope_bound = 1.1"));
  const double secs = seconds_since(t0);
  s.record({8, "W^{1,p} growth", o.code == cli::exit_pass, "log-log slope " + num(measured(o, "slope")) + " (<= 1.1)", secs});
}

inline void yudovich(Suite& s) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto o = s.experiment("c09_yudovich", "yudovich",
                              ini("N = 64", "dt = 0.002\nT = 1\nsnapshot_stride = 25", std::string(additive_run) + two_mode,
                                  "kind = additive\nsigma0 = 1\nmaster_seed = 7",
                                  "delta_list = 0.0001, 0.001, 0.01\ncheckpoints = 0.25, 0.5, 1"));
  const double secs = seconds_since(t0);
  const std::string d = "twin runs bitwise identical " + std::string(measured(o, "identical_data_bitwise") == 1.0 ? "yes" : "no") +
                        ", separation monotone in delta " +
                        std::string(measured(o, "separation_monotone_in_delta") == 1.0 ? "yes" : "no");
  s.record({9, "Yudovich floor", o.code == cli::exit_pass, o.code == cli::exit_pass ? d : failure(o), secs});
}

inline void moments(Suite& s) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string text = ini("N = 64", "dt = 0.005\nT = 1\nsnapshot_stride = 20",
                               std::string("advection = arakawa\n") + two_mode, "kind = multiplicative\nmaster_seed = 11",
                               "nu_list = 0.01, 0.001\np_list = 2, 4\npaths = 64\nbound_factor = 2");
  const auto a = s.experiment("c10_moments", "moments", text);
  const auto b = s.experiment("c10_enstrophy_moments", "enstrophy-moments", text);
  const double secs = seconds_since(t0);
  const bool ok = a.code == cli::exit_pass && b.code == cli::exit_pass && secs < 1200.0;
  std::string d = "nu ratios E sup|u|^2 " + num(measured(a, "nu_ratio_sup_u_l2^2")) + ", ^4 " + num(measured(a, "nu_ratio_sup_u_l2^4")) +
                  "; E sup|u|_H1^2 " + num(measured(b, "nu_ratio_sup_u_h1^2")) + ", ^4 " + num(measured(b, "nu_ratio_sup_u_h1^4"));
  if (!ok) d += " [" + failure(a.code != cli::exit_pass ? a : b) + "]";
  s.record({10, "multiplicative moments", ok, d + "; " + runtime_note(secs, 1200), secs});
}

inline void tightness(Suite& s) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string grid = "N = 32", time = "dt = 0.005\nT = 1\nsnapshot_stride = 4";
  const std::string physics = std::string("advection = arakawa\n") + two_mode;
  const std::string exp = "nu_list = 0.01, 0.001\ngamma = 0.4\ndual_order = 2\nbound_factor = 2\ndecompose = true\n";
  const auto a = s.experiment("c11_tightness", "tightness",
                              ini(grid, time, physics, "kind = multiplicative\nmaster_seed = 13", exp + "paths = 32"));
  const auto b = s.experiment("c11_tightness_control", "tightness", ini(grid, time, physics, "kind = none", exp + "paths = 1"));
  const double secs = seconds_since(t0);
  bool j5_zero = b.report.has_value();
  for (double nu : {0.01, 0.001}) j5_zero = j5_zero && measured(b, eul2d::detail::tag("mean_J5_noise", nu)) == 0.0;
  const bool ok = a.code == cli::exit_pass && j5_zero;
  std::string d = "nu ratio of mean norms " + num(measured(a, "nu_ratio_mean_norm")) + " (<= 2); control J5 " +
                  (j5_zero ? "identically 0" : "nonzero");
  if (a.code != cli::exit_pass) d += " [" + failure(a) + "]";
  s.record({11, "tightness norm", ok, d, secs});
}

inline void ito(Suite& s) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto o = s.experiment("c12_ito", "ito-check",
                              "[time]\nT = 1\n[experiment]\ngamma = 0.25\np = 2\npaths = 10000\ntime_points = 512\nintegrand = 1\ntolerance = 0.05\n");
  const double secs = seconds_since(t0);
  s.record({12, "Ito fractional bound", o.code == cli::exit_pass,
            "estimate " + num(measured(o, "estimate")) + " vs 19/6 = " + num(19.0 / 6.0) + ", relative error " +
                num(measured(o, "relative_error")) + " (<= 0.05)",
            secs});
}

inline void g1(Suite& s) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto o = s.experiment("c13_g1", "g1-check", "[grid]\nN = 64\n[noise]\ncoefficients = standard\n[experiment]\nsamples = 200\n");
  const double secs = seconds_since(t0);
  const double l2 = measured(o, "min_relative_margin_l2"), curl = measured(o, "min_relative_margin_curl");
  s.record({13, "(G1)' verification", o.code == cli::exit_pass,
            "smallest relative margins over 200 fields: L2 " + num(l2) + ", curl " + num(curl) + " (>= 0)", secs});
}

inline void replay_all(Suite& s) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> bad;
  for (const auto& m : s.manifests()) {
    cli::Options o;
    o.threads = 1;
    std::ostringstream log;
    o.log = &log;
    const auto r = cli::replay(m, o);
    if (r.code != cli::exit_pass) bad.push_back(m.parent_path().filename().string() + " (exit " + std::to_string(r.code) + ")");
  }
  const double secs = seconds_since(t0);
  std::string d = std::to_string(s.manifests().size() - bad.size()) + "/" + std::to_string(s.manifests().size()) + " runs replay bitwise";
  for (const auto& b : bad) d += "; " + b;
  s.record({14, "serial replay", bad.empty() && !s.manifests().empty(), d, secs});
}

}  // namespace detail

using Criterion = std::function<void(detail::Suite&)>;

inline const std::vector<std::pair<int, Criterion>>& criteria() {
  static const std::vector<std::pair<int, Criterion>> list = {
      {1, detail::elliptic},   {2, detail::conservation}, {3, detail::eigenmode}, {4, detail::uniform_nu},
      {5, detail::vanishing_viscosity}, {6, detail::maximum_principle}, {7, detail::kato}, {8, detail::w1p},
      {9, detail::yudovich},   {10, detail::moments},    {11, detail::tightness}, {12, detail::ito},
      {13, detail::g1},        {14, detail::replay_all}};
  return list;
}

// Runs the selected criteria (all when `only` is empty) under root.
inline std::vector<Result> run_all(const std::filesystem::path& root, int threads, std::ostream& out,
                                   const std::set<int>& only = {}) {
  detail::Suite suite(root, threads, out);
  for (const auto& [id, fn] : criteria()) {
    if (only.empty() || only.count(id)) fn(suite);
  }
  return suite.results();
}

}  // namespace eul2d::acceptance
