#pragma once

// EstimateReport: named measurements, optional bounds, and a verdict.
//
// A checked measurement has margin = bound - value for upper bounds and
// value - bound for lower bounds; it passes when margin >= 0. Only hard checks
// decide the verdict. Runtime is kept out of the serialized text so report
// files are a deterministic function of the inputs.

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "eul2d/format.hpp"

namespace eul2d {

enum class Sense { at_most, at_least };

struct Measurement {
  std::string quantity;
  double value = 0.0;
  double bound = std::numeric_limits<double>::quiet_NaN();
  double margin = std::numeric_limits<double>::quiet_NaN();
  bool checked = false;
  bool hard = false;
  bool pass = true;
};

class EstimateReport {
 public:
  explicit EstimateReport(std::string name = {}) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }

  void input(std::string key, std::string value) { inputs_.emplace_back(std::move(key), std::move(value)); }
  void input(std::string key, double value) { input(std::move(key), format_double(value)); }

  void measure(std::string quantity, double value) {
    Measurement m;
    m.quantity = std::move(quantity);
    m.value = value;
    measurements_.push_back(std::move(m));
  }

  // Records a bound check and returns whether it passed.
  bool check(std::string quantity, double value, double bound, Sense sense, bool hard = true) {
    Measurement m;
    m.quantity = std::move(quantity);
    m.value = value;
    m.bound = bound;
    m.margin = sense == Sense::at_most ? bound - value : value - bound;
    m.checked = true;
    m.hard = hard;
    m.pass = m.margin >= 0.0;  // NaN fails
    measurements_.push_back(std::move(m));
    return measurements_.back().pass;
  }

  bool require(std::string quantity, bool condition, bool hard = true) {
    return check(std::move(quantity), condition ? 1.0 : 0.0, 1.0, Sense::at_least, hard);
  }

  void note(std::string text) { notes_.push_back(std::move(text)); }

  bool pass() const {
    for (const auto& m : measurements_) {
      if (m.hard && !m.pass) return false;
    }
    return true;
  }

  const std::vector<Measurement>& measurements() const { return measurements_; }
  const std::vector<std::pair<std::string, std::string>>& inputs() const { return inputs_; }
  const std::vector<std::string>& notes() const { return notes_; }

  // Value of the first measurement with this name; NaN when absent.
  double value(const std::string& quantity) const {
    for (const auto& m : measurements_) {
      if (m.quantity == quantity) return m.value;
    }
    return std::numeric_limits<double>::quiet_NaN();
  }
  const Measurement* find(const std::string& quantity) const {
    for (const auto& m : measurements_) {
      if (m.quantity == quantity) return &m;
    }
    return nullptr;
  }

  double runtime_seconds = 0.0;

  std::string to_text() const {
    std::string s = "report " + name_ + "\n";
    s += std::string("verdict ") + (pass() ? "PASS" : "FAIL") + "\n";
    for (const auto& [k, v] : inputs_) s += "input " + k + " = " + v + "\n";
    for (const auto& m : measurements_) {
      s += "  " + m.quantity + " = " + format_double(m.value);
      if (m.checked) {
        s += "  bound " + format_double(m.bound) + "  margin " + format_double(m.margin);
        s += m.pass ? "  ok" : "  VIOLATED";
        if (!m.hard) s += " (soft)";
      }
      s += "\n";
    }
    for (const auto& n : notes_) s += "note " + n + "\n";
    return s;
  }

  std::string to_csv() const {
    std::string s = "quantity,value,bound,margin,pass\n";
    for (const auto& m : measurements_) {
      s += m.quantity + "," + format_double(m.value) + ",";
      if (m.checked) {
        s += format_double(m.bound) + "," + format_double(m.margin) + "," + (m.pass ? "1" : "0");
      } else {
        s += ",,";
      }
      s += "\n";
    }
    return s;
  }

 private:
  std::string name_;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<Measurement> measurements_;
  std::vector<std::string> notes_;
};

}  // namespace eul2d
