#pragma once

// Finite sine series  sum_m a_m sin(k_m pi x) sin(l_m pi y)  with exact
// derivatives. These carry analytic initial vorticity, forcing curls, noise
// streamfunctions and test modes.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "eul2d/field.hpp"

namespace eul2d {

struct SineTerm {
  double amplitude = 0.0;
  int k = 1;
  int l = 1;

  // Eigenvalue of -Delta for this mode on the unit square.
  double eigenvalue() const { return std::numbers::pi * std::numbers::pi * static_cast<double>(k * k + l * l); }
  bool operator==(const SineTerm&) const = default;
};

class SineSeries {
 public:
  SineSeries() = default;
  explicit SineSeries(std::vector<SineTerm> terms) : terms_(std::move(terms)) {
    for (const auto& t : terms_) {
      if (t.k < 1 || t.l < 1) throw std::invalid_argument("sine series wavenumbers must be >= 1");
      if (!std::isfinite(t.amplitude)) throw std::invalid_argument("sine series amplitude must be finite");
    }
  }

  static SineSeries mode(int k, int l, double amplitude = 1.0) { return SineSeries({{amplitude, k, l}}); }

  const std::vector<SineTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  double value(double x, double y) const {
    double s = 0.0;
    for (const auto& t : terms_) s += t.amplitude * sx(t.k, x) * sx(t.l, y);
    return s;
  }
  double dx(double x, double y) const {
    double s = 0.0;
    for (const auto& t : terms_) s += t.amplitude * t.k * std::numbers::pi * cx(t.k, x) * sx(t.l, y);
    return s;
  }
  double dy(double x, double y) const {
    double s = 0.0;
    for (const auto& t : terms_) s += t.amplitude * t.l * std::numbers::pi * sx(t.k, x) * cx(t.l, y);
    return s;
  }

  ScalarField sample(const Grid& g) const {
    return ScalarField::sample(g, [this](double x, double y) { return value(x, y); });
  }

  // Analytic (d/dy, -d/dx) of the series.
  VectorField sample_perp_gradient(const Grid& g) const {
    return VectorField::sample(
        g, [this](double x, double y) { return std::pair{dy(x, y), -dx(x, y)}; }, true);
  }

  // Series solving -Delta psi = this.
  SineSeries inverse_laplacian() const {
    std::vector<SineTerm> out = terms_;
    for (auto& t : out) t.amplitude /= t.eigenvalue();
    return SineSeries(std::move(out));
  }
  // -Delta applied termwise.
  SineSeries negative_laplacian() const {
    std::vector<SineTerm> out = terms_;
    for (auto& t : out) t.amplitude *= t.eigenvalue();
    return SineSeries(std::move(out));
  }

  SineSeries scaled(double a) const {
    std::vector<SineTerm> out = terms_;
    for (auto& t : out) t.amplitude *= a;
    return SineSeries(std::move(out));
  }

  bool operator==(const SineSeries&) const = default;

 private:
  static double sx(int k, double x) { return std::sin(k * std::numbers::pi * x); }
  static double cx(int k, double x) { return std::cos(k * std::numbers::pi * x); }

  std::vector<SineTerm> terms_;
};

}  // namespace eul2d
