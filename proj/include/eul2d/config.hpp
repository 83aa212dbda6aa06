#pragma once

// Run configuration files.
//
//   # comment
//   [grid]
//   N = 64
//   [physics]
//   initial = 1*sin(1,1) + 0.3*sin(2,1)
//
// Sections: grid, time, physics, noise, experiment, output. Every key belongs
// to exactly one section; unknown sections, unknown keys, duplicates and
// malformed values raise ConfigError with line:column. Keys left out take
// defaults, some of which depend on [experiment] name. serialize() writes
// every key in a fixed order, so the text is the effective configuration and
// parse(serialize(c)) == c.
//
// Value grammar
//   list        v1, v2, ...        (may be empty)
//   sine series none | term (('+' | '-') term)*,  term = [amp '*'] 'sin(' k ',' l ')'
//   initial     sine series | file:<path>   (path made absolute at parse time)
//   modes       standard | k:l:sigma, ...
//   coefficients standard | freq:amp, ...

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "eul2d/dynamics.hpp"
#include "eul2d/errors.hpp"
#include "eul2d/field_io.hpp"
#include "eul2d/format.hpp"
#include "eul2d/sine_series.hpp"

namespace eul2d {

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "uniform-nu", "vv-limit",  "max-principle", "kato",       "w1p",          "yudovich", "moments",
      "enstrophy-moments", "tightness", "banach-moments", "weak-residual", "ito-check", "g1-check",
      "elliptic-convergence"};
  return names;
}

inline bool is_experiment_name(std::string_view s) {
  const auto& n = experiment_names();
  return std::find(n.begin(), n.end(), s) != n.end();
}

struct ExperimentConfig {
  std::string name = "none";
  std::vector<double> nu_list;
  std::vector<double> p_list;
  std::vector<double> q_list;
  std::vector<double> delta_list;
  std::vector<double> checkpoints;
  std::vector<double> n_list;
  std::size_t paths = 1;
  int samples = 100;
  int band_limit = 16;
  double gamma = 0.4;
  double p = 2.0;
  double dual_order = 2.0;
  double bound_factor = 2.0;
  double slope_bound = 0.6;
  double ratio_min = 3.5;
  double ratio_max = 4.5;
  double epsilon = 1e-3;
  double tolerance = 1e-2;
  int test_modes = 4;
  bool refine = false;
  bool decompose = true;
  int resamples = 2000;
  double level = 0.95;
  std::size_t time_points = 512;
  double integrand = 1.0;
  SineSeries perturbation = SineSeries::mode(3, 2);

  bool operator==(const ExperimentConfig&) const = default;
};

struct RunConfig {
  // [grid]
  int N = 64;
  // [time]
  double dt = 1e-3;
  double T = 1.0;
  double cfl_safety = 0.5;
  int snapshot_stride = 10;
  // [physics]
  double nu = 0.0;
  AdvectionScheme advection = AdvectionScheme::arakawa;
  SineSeries initial = SineSeries::mode(1, 1);
  std::string initial_file;  // absolute; overrides `initial` when set
  SineSeries forcing_curl;
  // [noise]
  NoiseKind noise = NoiseKind::none;
  double sigma0 = 1.0;
  int kmax = 4;
  std::optional<std::vector<AdditiveMode>> modes;
  int coefficient_count = 4;
  std::optional<std::vector<NoiseCoefficient>> coefficients;
  std::uint64_t master_seed = 1;
  std::uint64_t path_index = 0;
  // [experiment]
  ExperimentConfig experiment;
  // [output]
  std::string directory = "run";
  FieldEncoding encoding = FieldEncoding::binary;

  bool operator==(const RunConfig&) const = default;

  NoiseModel noise_model() const {
    NoiseModel m;
    m.kind = noise;
    if (noise == NoiseKind::additive) m.additive = modes ? AdditiveNoise(*modes) : AdditiveNoise::standard(sigma0, kmax);
    if (noise == NoiseKind::multiplicative) {
      m.multiplicative = coefficients ? MultiplicativeNoise(*coefficients) : MultiplicativeNoise::standard(coefficient_count);
    }
    return m;
  }

  SolverConfig solver() const {
    SolverConfig c;
    c.N = N;
    c.dt = dt;
    c.T = T;
    c.nu = nu;
    c.advection = advection;
    c.noise = noise_model();
    c.forcing_curl = forcing_curl;
    c.cfl_safety = cfl_safety;
    c.master_seed = master_seed;
    c.path_index = path_index;
    c.snapshot_stride = snapshot_stride;
    return c;
  }
};

// ---------------------------------------------------------------------------
// value text

inline std::string format_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  return s;
}

inline std::string format_series(const SineSeries& s) {
  if (s.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < s.terms().size(); ++i) {
    const auto& t = s.terms()[i];
    if (i) out += " + ";
    out += format_double(t.amplitude) + "*sin(" + std::to_string(t.k) + "," + std::to_string(t.l) + ")";
  }
  return out;
}

namespace detail {

// Value parsers report offsets relative to the value start; the caller adds
// the column.
struct ValueError {
  std::string what;
  std::size_t offset = 0;
};

class Cursor {
 public:
  explicit Cursor(std::string_view s) : s_(s) {}
  void skip() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool done() {
    skip();
    return pos_ >= s_.size();
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool accept(std::string_view word) {
    skip();
    if (s_.substr(pos_, word.size()) == word) {
      pos_ += word.size();
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) throw ValueError{std::string("expected '") + c + "'", pos_};
  }
  double number() {
    skip();
    double v = 0.0;
    const auto res = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (res.ec != std::errc()) throw ValueError{"expected a number", pos_};
    pos_ = static_cast<std::size_t>(res.ptr - s_.data());
    return v;
  }
  int integer() {
    skip();
    int v = 0;
    const auto res = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (res.ec != std::errc()) throw ValueError{"expected an integer", pos_};
    pos_ = static_cast<std::size_t>(res.ptr - s_.data());
    return v;
  }
  std::size_t pos() const { return pos_; }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

inline SineSeries parse_series(std::string_view text) {
  if (trim(text) == "none") return {};
  Cursor c(text);
  std::vector<SineTerm> terms;
  double sign = 1.0;
  while (true) {
    const std::size_t at = c.pos();
    SineTerm t;
    t.amplitude = 1.0;
    c.skip();
    if (!c.accept("sin")) {
      t.amplitude = c.number();
      c.expect('*');
      if (!c.accept("sin")) throw ValueError{"expected 'sin'", c.pos()};
    }
    c.expect('(');
    t.k = c.integer();
    c.expect(',');
    t.l = c.integer();
    c.expect(')');
    if (t.k < 1 || t.l < 1) throw ValueError{"wavenumbers must be >= 1", at};
    t.amplitude *= sign;
    terms.push_back(t);
    if (c.done()) break;
    if (c.accept('+')) {
      sign = 1.0;
    } else if (c.accept('-')) {
      sign = -1.0;
    } else {
      throw ValueError{"expected '+' or '-'", c.pos()};
    }
  }
  try {
    return SineSeries(std::move(terms));
  } catch (const std::invalid_argument& e) {
    throw ValueError{e.what(), 0};
  }
}

// Comma-separated items; `item` parses one item from its own text.
template <typename F>
void split_items(std::string_view text, F&& item) {
  if (trim(text).empty()) return;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? text.size() : comma;
    const std::string_view raw = text.substr(start, end - start);
    const std::size_t lead = raw.find_first_not_of(" \t");
    try {
      item(trim(raw));
    } catch (ValueError& e) {
      e.offset += start + (lead == std::string_view::npos ? 0 : lead);
      throw;
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
}

inline std::vector<double> parse_list(std::string_view text) {
  std::vector<double> v;
  split_items(text, [&](std::string_view s) {
    const auto d = parse_double(s);
    if (!d || !std::isfinite(*d)) throw ValueError{"expected a number", 0};
    v.push_back(*d);
  });
  return v;
}

inline std::vector<double> parse_fields(std::string_view s, std::size_t count) {
  std::vector<double> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t colon = i + 1 < count ? s.find(':', start) : s.size();
    if (colon == std::string_view::npos) throw ValueError{"expected " + std::to_string(count) + " ':'-separated fields", 0};
    const auto d = parse_double(trim(s.substr(start, colon - start)));
    if (!d) throw ValueError{"expected a number", start};
    out.push_back(*d);
    start = colon + 1;
  }
  return out;
}

inline int whole(double v, std::size_t offset) {
  if (v != std::floor(v) || std::abs(v) > 1e6) throw ValueError{"expected an integer", offset};
  return static_cast<int>(v);
}

inline std::vector<AdditiveMode> parse_modes(std::string_view text) {
  std::vector<AdditiveMode> m;
  split_items(text, [&](std::string_view s) {
    const auto f = parse_fields(s, 3);
    m.push_back({whole(f[0], 0), whole(f[1], 0), f[2]});
  });
  try {
    AdditiveNoise check(m);
  } catch (const std::invalid_argument& e) {
    throw ValueError{e.what(), 0};
  }
  return m;
}

inline std::vector<NoiseCoefficient> parse_coefficients(std::string_view text) {
  std::vector<NoiseCoefficient> c;
  split_items(text, [&](std::string_view s) {
    const auto f = parse_fields(s, 2);
    c.push_back({whole(f[0], 0), f[1]});
  });
  try {
    MultiplicativeNoise check(c);
  } catch (const std::invalid_argument& e) {
    throw ValueError{e.what(), 0};
  }
  return c;
}

template <typename Int>
Int parse_int_value(std::string_view s) {
  const auto v = parse_integer<Int>(s);
  if (!v) throw ValueError{"expected an integer", 0};
  return *v;
}

inline double parse_real_value(std::string_view s) {
  const auto v = parse_double(s);
  if (!v || !std::isfinite(*v)) throw ValueError{"expected a finite number", 0};
  return *v;
}

inline bool parse_bool_value(std::string_view s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ValueError{"expected true or false", 0};
}

// Defaults for list-valued and threshold keys depend on the experiment.
inline void resolve_experiment_defaults(ExperimentConfig& e, const std::set<std::string>& given) {
  auto unset = [&](const char* key) { return !given.count(key); };
  const std::string& n = e.name;
  if (unset("nu_list")) {
    if (n == "uniform-nu") e.nu_list = {1e-2, 1e-3, 1e-4};
    if (n == "vv-limit") e.nu_list = {1e-2, 2.5e-3, 6.25e-4};
    if (n == "moments" || n == "enstrophy-moments" || n == "tightness" || n == "banach-moments") e.nu_list = {1e-2, 1e-3};
  }
  if (unset("p_list")) {
    if (n == "kato") e.p_list = {2, 4, 8, 16, 32};
    if (n == "w1p") e.p_list = {2, 4, 8, 16};
    if (n == "moments" || n == "enstrophy-moments" || n == "banach-moments") e.p_list = {2, 4};
  }
  if (unset("q_list") && n == "banach-moments") e.q_list = {2, 4, 8};
  if (unset("delta_list") && n == "yudovich") e.delta_list = {1e-4, 1e-3, 1e-2};
  if (unset("checkpoints") && n == "yudovich") e.checkpoints = {0.25, 0.5, 1.0};
  if (unset("n_list") && n == "elliptic-convergence") e.n_list = {64, 128};
  if (unset("paths")) {
    if (n == "moments" || n == "enstrophy-moments" || n == "banach-moments") e.paths = 64;
    if (n == "tightness") e.paths = 32;
    if (n == "ito-check") e.paths = 10000;
  }
  if (unset("samples") && n == "g1-check") e.samples = 200;
  if (unset("gamma") && n == "ito-check") e.gamma = 0.25;
  if (unset("slope_bound") && n == "w1p") e.slope_bound = 1.1;
  if (unset("tolerance") && n == "ito-check") e.tolerance = 0.05;
}

}  // namespace detail

// ---------------------------------------------------------------------------

// `experiment` names the experiment being run: it fills [experiment] name when
// the file leaves it out and must match it otherwise.
inline RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {},
                              std::string_view experiment = {}) {
  RunConfig c;
  ExperimentConfig& e = c.experiment;
  std::set<std::string> given;
  std::string section;
  const std::set<std::string> sections = {"grid", "time", "physics", "noise", "experiment", "output"};

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) continue;
    const int col0 = static_cast<int>(first) + 1;

    if (line[first] == '[') {
      const auto close = line.find(']', first);
      if (close == std::string_view::npos) throw ConfigError("unterminated section header", line_no, col0);
      if (!trim(line.substr(close + 1)).empty()) {
        throw ConfigError("unexpected text after section header", line_no, static_cast<int>(close) + 2);
      }
      section = std::string(trim(line.substr(first + 1, close - first - 1)));
      if (!sections.count(section)) throw ConfigError("unknown section [" + section + "]", line_no, col0);
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no, col0);
    const std::string key(trim(line.substr(0, eq)));
    if (section.empty()) throw ConfigError("key '" + key + "' outside any section", line_no, col0);
    const std::string_view rest = line.substr(eq + 1);
    const auto vstart = rest.find_first_not_of(" \t");
    const int vcol = static_cast<int>(eq) + 2 + (vstart == std::string_view::npos ? 0 : static_cast<int>(vstart));
    const std::string_view value = trim(rest);
    const std::string full = section + "." + key;
    if (given.count(full)) throw ConfigError("duplicate key '" + key + "'", line_no, col0);

    try {
      bool known = true;
      auto real = [&](double& dst) { dst = detail::parse_real_value(value); };
      auto integer = [&](int& dst) { dst = detail::parse_int_value<int>(value); };
      if (section == "grid") {
        if (key == "N") integer(c.N);
        else known = false;
      } else if (section == "time") {
        if (key == "dt") real(c.dt);
        else if (key == "T") real(c.T);
        else if (key == "cfl_safety") real(c.cfl_safety);
        else if (key == "snapshot_stride") integer(c.snapshot_stride);
        else known = false;
      } else if (section == "physics") {
        if (key == "nu") real(c.nu);
        else if (key == "advection") {
          if (value != "arakawa" && value != "upwind") throw detail::ValueError{"expected arakawa or upwind", 0};
          c.advection = parse_advection(value);
        } else if (key == "initial") {
          if (value.starts_with("file:")) {
            std::filesystem::path p(std::string(trim(value.substr(5))));
            if (p.empty()) throw detail::ValueError{"empty file path", 5};
            if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
            c.initial_file = p.is_relative() ? p.string() : p.lexically_normal().string();
            c.initial = {};
          } else {
            c.initial = detail::parse_series(value);
            c.initial_file.clear();
          }
        } else if (key == "forcing_curl") {
          c.forcing_curl = detail::parse_series(value);
        } else known = false;
      } else if (section == "noise") {
        if (key == "kind") {
          if (value != "none" && value != "additive" && value != "multiplicative") {
            throw detail::ValueError{"expected none, additive or multiplicative", 0};
          }
          c.noise = parse_noise_kind(value);
        } else if (key == "sigma0") real(c.sigma0);
        else if (key == "kmax") integer(c.kmax);
        else if (key == "modes") {
          if (value == "standard") c.modes.reset();
          else c.modes = detail::parse_modes(value);
        } else if (key == "coefficient_count") integer(c.coefficient_count);
        else if (key == "coefficients") {
          if (value == "standard") c.coefficients.reset();
          else c.coefficients = detail::parse_coefficients(value);
        } else if (key == "master_seed") c.master_seed = detail::parse_int_value<std::uint64_t>(value);
        else if (key == "path_index") c.path_index = detail::parse_int_value<std::uint64_t>(value);
        else known = false;
      } else if (section == "experiment") {
        if (key == "name") {
          if (value != "none" && !is_experiment_name(value)) throw detail::ValueError{"unknown experiment '" + std::string(value) + "'", 0};
          e.name = std::string(value);
        } else if (key == "nu_list") e.nu_list = detail::parse_list(value);
        else if (key == "p_list") e.p_list = detail::parse_list(value);
        else if (key == "q_list") e.q_list = detail::parse_list(value);
        else if (key == "delta_list") e.delta_list = detail::parse_list(value);
        else if (key == "checkpoints") e.checkpoints = detail::parse_list(value);
        else if (key == "n_list") e.n_list = detail::parse_list(value);
        else if (key == "paths") e.paths = detail::parse_int_value<std::size_t>(value);
        else if (key == "samples") integer(e.samples);
        else if (key == "band_limit") integer(e.band_limit);
        else if (key == "gamma") real(e.gamma);
        else if (key == "p") real(e.p);
        else if (key == "dual_order") real(e.dual_order);
        else if (key == "bound_factor") real(e.bound_factor);
        else if (key == "slope_bound") real(e.slope_bound);
        else if (key == "ratio_min") real(e.ratio_min);
        else if (key == "ratio_max") real(e.ratio_max);
        else if (key == "epsilon") real(e.epsilon);
        else if (key == "tolerance") real(e.tolerance);
        else if (key == "test_modes") integer(e.test_modes);
        else if (key == "refine") e.refine = detail::parse_bool_value(value);
        else if (key == "decompose") e.decompose = detail::parse_bool_value(value);
        else if (key == "resamples") integer(e.resamples);
        else if (key == "level") real(e.level);
        else if (key == "time_points") e.time_points = detail::parse_int_value<std::size_t>(value);
        else if (key == "integrand") real(e.integrand);
        else if (key == "perturbation") e.perturbation = detail::parse_series(value);
        else known = false;
      } else if (section == "output") {
        if (key == "directory") {
          if (value.empty()) throw detail::ValueError{"empty directory", 0};
          c.directory = std::string(value);
        } else if (key == "encoding") {
          if (value == "binary") c.encoding = FieldEncoding::binary;
          else if (value == "csv") c.encoding = FieldEncoding::csv;
          else throw detail::ValueError{"expected binary or csv", 0};
        } else known = false;
      }
      if (!known) throw ConfigError("unknown key '" + key + "' in [" + section + "]", line_no, col0);
    } catch (const detail::ValueError& err) {
      throw ConfigError(key + ": " + err.what, line_no, vcol + static_cast<int>(err.offset));
    }
    given.insert(full);
    if (section == "experiment") given.insert(key);
  }
  if (!experiment.empty()) {
    if (!is_experiment_name(experiment)) throw ConfigError("unknown experiment '" + std::string(experiment) + "'");
    if (e.name == "none") {
      e.name = std::string(experiment);
    } else if (e.name != experiment) {
      throw ConfigError("config is for experiment '" + e.name + "', not '" + std::string(experiment) + "'");
    }
  }
  detail::resolve_experiment_defaults(e, given);
  return c;
}

inline std::string serialize_config(const RunConfig& c) {
  const ExperimentConfig& e = c.experiment;
  std::ostringstream o;
  auto kv = [&](const char* k, const std::string& v) { o << k << " = " << v << "\n"; };
  auto num = [&](const char* k, double v) { kv(k, format_double(v)); };
  auto whole = [&](const char* k, auto v) { kv(k, std::to_string(v)); };
  auto flag = [&](const char* k, bool v) { kv(k, v ? "true" : "false"); };

  o << "[grid]\n";
  whole("N", c.N);
  o << "\n[time]\n";
  num("dt", c.dt);
  num("T", c.T);
  num("cfl_safety", c.cfl_safety);
  whole("snapshot_stride", c.snapshot_stride);
  o << "\n[physics]\n";
  num("nu", c.nu);
  kv("advection", to_string(c.advection));
  kv("initial", c.initial_file.empty() ? format_series(c.initial) : "file:" + c.initial_file);
  kv("forcing_curl", format_series(c.forcing_curl));
  o << "\n[noise]\n";
  kv("kind", to_string(c.noise));
  num("sigma0", c.sigma0);
  whole("kmax", c.kmax);
  if (c.modes) {
    std::string s;
    for (const auto& m : *c.modes) {
      s += (s.empty() ? "" : ", ") + std::to_string(m.k) + ":" + std::to_string(m.l) + ":" + format_double(m.sigma);
    }
    kv("modes", s);
  } else {
    kv("modes", "standard");
  }
  whole("coefficient_count", c.coefficient_count);
  if (c.coefficients) {
    std::string s;
    for (const auto& k : *c.coefficients) s += (s.empty() ? "" : ", ") + std::to_string(k.freq) + ":" + format_double(k.amp);
    kv("coefficients", s);
  } else {
    kv("coefficients", "standard");
  }
  whole("master_seed", c.master_seed);
  whole("path_index", c.path_index);
  o << "\n[experiment]\n";
  kv("name", e.name);
  kv("nu_list", format_list(e.nu_list));
  kv("p_list", format_list(e.p_list));
  kv("q_list", format_list(e.q_list));
  kv("delta_list", format_list(e.delta_list));
  kv("checkpoints", format_list(e.checkpoints));
  kv("n_list", format_list(e.n_list));
  whole("paths", e.paths);
  whole("samples", e.samples);
  whole("band_limit", e.band_limit);
  num("gamma", e.gamma);
  num("p", e.p);
  num("dual_order", e.dual_order);
  num("bound_factor", e.bound_factor);
  num("slope_bound", e.slope_bound);
  num("ratio_min", e.ratio_min);
  num("ratio_max", e.ratio_max);
  num("epsilon", e.epsilon);
  num("tolerance", e.tolerance);
  whole("test_modes", e.test_modes);
  flag("refine", e.refine);
  flag("decompose", e.decompose);
  whole("resamples", e.resamples);
  num("level", e.level);
  whole("time_points", e.time_points);
  num("integrand", e.integrand);
  kv("perturbation", format_series(e.perturbation));
  o << "\n[output]\n";
  kv("directory", c.directory);
  kv("encoding", c.encoding == FieldEncoding::binary ? "binary" : "csv");
  return o.str();
}

inline RunConfig load_config(const std::filesystem::path& path, std::string_view experiment = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::filesystem::absolute(path).parent_path(), experiment);
}

}  // namespace eul2d
