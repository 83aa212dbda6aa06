#pragma once

// Discrete fields on the unit square.
//
// Values live on the N x N interior nodes of a uniform grid with spacing
// h = 1/(N+1). Node (i, j) sits at (x, y) = ((i+1)h, (j+1)h) and is stored
// row-major with y as the slow index: index = j*N + i.
//
// Boundary values are never stored. Each array carries an Extension that says
// how to reconstruct the ring of boundary nodes when a stencil or quadrature
// needs it: either the value is zero there (Dirichlet data, normal velocity
// components) or it is quadratically extrapolated from the interior, which
// turns a central difference at the first interior node into the second-order
// one-sided formula (-3f0 + 4f1 - f2)/(2h).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace eul2d {

class Grid {
 public:
  explicit Grid(int n) : n_(n), h_(1.0 / static_cast<double>(n + 1)) {
    if (n < 8) {
      throw std::invalid_argument("grid needs N >= 8, got N=" + std::to_string(n));
    }
    // Rejects the N for which 1/(N+1) does not round-trip; the spacing is then
    // exactly representable as a reciprocal and x(N) == 1 - h holds bitwise.
    if (h_ * static_cast<double>(n + 1) != 1.0) {
      throw std::invalid_argument("grid N=" + std::to_string(n) +
                                  " rejected: h*(N+1) != 1 in double precision");
    }
  }

  int n() const { return n_; }
  double h() const { return h_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_); }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(i);
  }
  // Coordinate of node index i in [-1, N]; -1 and N are the walls.
  double coord(int i) const { return static_cast<double>(i + 1) * h_; }

  bool operator==(const Grid& other) const { return n_ == other.n_; }

 private:
  int n_;
  double h_;
};

enum class Edge { zero, extrapolate };

struct Extension {
  Edge x = Edge::zero;  // ghosts at i = -1 and i = N
  Edge y = Edge::zero;  // ghosts at j = -1 and j = N

  static constexpr Extension dirichlet() { return {Edge::zero, Edge::zero}; }
  static constexpr Extension free() { return {Edge::extrapolate, Edge::extrapolate}; }
  bool operator==(const Extension&) const = default;
};

// Interior values plus the reconstructed boundary ring, (N+2) x (N+2).
class Padded {
 public:
  Padded(const Grid& grid, std::span<const double> values, Extension ext)
      : n_(grid.n()), v_(static_cast<std::size_t>((n_ + 2) * (n_ + 2)), 0.0) {
    const int n = n_;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) ref(i, j) = values[static_cast<std::size_t>(j * n + i)];
      if (ext.x == Edge::extrapolate) {
        ref(-1, j) = 3.0 * at(0, j) - 3.0 * at(1, j) + at(2, j);
        ref(n, j) = 3.0 * at(n - 1, j) - 3.0 * at(n - 2, j) + at(n - 3, j);
      }
    }
    if (ext.y == Edge::extrapolate) {
      for (int i = -1; i <= n; ++i) {
        ref(i, -1) = 3.0 * at(i, 0) - 3.0 * at(i, 1) + at(i, 2);
        ref(i, n) = 3.0 * at(i, n - 1) - 3.0 * at(i, n - 2) + at(i, n - 3);
      }
    }
  }

  double at(int i, int j) const { return v_[slot(i, j)]; }
  int n() const { return n_; }

 private:
  std::size_t slot(int i, int j) const { return static_cast<std::size_t>((j + 1) * (n_ + 2) + (i + 1)); }
  double& ref(int i, int j) { return v_[slot(i, j)]; }

  int n_;
  std::vector<double> v_;
};

class ScalarField {
 public:
  explicit ScalarField(const Grid& grid, Extension ext = Extension::dirichlet())
      : grid_(grid), values_(grid.size(), 0.0), ext_(ext) {}
  ScalarField(const Grid& grid, std::vector<double> values, Extension ext = Extension::dirichlet())
      : grid_(grid), values_(std::move(values)), ext_(ext) {
    if (values_.size() != grid_.size()) {
      throw std::invalid_argument("scalar field shape does not match grid");
    }
  }

  template <typename F>
  static ScalarField sample(const Grid& grid, F&& f, Extension ext = Extension::dirichlet()) {
    ScalarField out(grid, ext);
    for (int j = 0; j < grid.n(); ++j) {
      for (int i = 0; i < grid.n(); ++i) out(i, j) = f(grid.coord(i), grid.coord(j));
    }
    return out;
  }

  const Grid& grid() const { return grid_; }
  Extension extension() const { return ext_; }
  void set_extension(Extension ext) { ext_ = ext; }

  double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::size_t size() const { return values_.size(); }

  Padded padded() const { return Padded(grid_, values_, ext_); }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

  ScalarField& operator+=(const ScalarField& o) {
    check_compatible(o);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
    return *this;
  }
  ScalarField& operator-=(const ScalarField& o) {
    check_compatible(o);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
    return *this;
  }
  ScalarField& operator*=(double a) {
    for (double& v : values_) v *= a;
    return *this;
  }
  // this += a * o
  ScalarField& axpy(double a, const ScalarField& o) {
    check_compatible(o);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += a * o.values_[k];
    return *this;
  }

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(double a, ScalarField b) { return b *= a; }

  bool operator==(const ScalarField& o) const {
    return grid_ == o.grid_ && ext_ == o.ext_ && values_ == o.values_;
  }

 private:
  void check_compatible(const ScalarField& o) const {
    if (!(grid_ == o.grid_)) throw std::invalid_argument("grid mismatch between scalar fields");
    if (!(ext_ == o.ext_)) throw std::invalid_argument("boundary extension mismatch between scalar fields");
  }

  Grid grid_;
  std::vector<double> values_;
  Extension ext_;
};

// Two-component field. `tangent` marks fields with zero normal trace on the
// walls (u1 = 0 on x = 0,1 and u2 = 0 on y = 0,1); the component extensions
// follow from it. Fields built by perp_gradient also keep their streamfunction.
class VectorField {
 public:
  explicit VectorField(const Grid& grid, bool tangent = false)
      : u1_(grid, component_extension(0, tangent)), u2_(grid, component_extension(1, tangent)), tangent_(tangent) {}
  VectorField(ScalarField u1, ScalarField u2, bool tangent = false)
      : u1_(std::move(u1)), u2_(std::move(u2)), tangent_(tangent) {
    if (!(u1_.grid() == u2_.grid())) throw std::invalid_argument("grid mismatch between vector components");
    u1_.set_extension(component_extension(0, tangent));
    u2_.set_extension(component_extension(1, tangent));
  }

  template <typename F>
  static VectorField sample(const Grid& grid, F&& f, bool tangent = false) {
    VectorField out(grid, tangent);
    for (int j = 0; j < grid.n(); ++j) {
      for (int i = 0; i < grid.n(); ++i) {
        auto [a, b] = f(grid.coord(i), grid.coord(j));
        out.u1_(i, j) = a;
        out.u2_(i, j) = b;
      }
    }
    return out;
  }

  static constexpr Extension component_extension(int component, bool tangent) {
    if (!tangent) return Extension::free();
    return component == 0 ? Extension{Edge::zero, Edge::extrapolate} : Extension{Edge::extrapolate, Edge::zero};
  }

  const Grid& grid() const { return u1_.grid(); }
  const ScalarField& u1() const { return u1_; }
  const ScalarField& u2() const { return u2_; }
  ScalarField& u1() { return u1_; }
  ScalarField& u2() { return u2_; }
  bool tangent() const { return tangent_; }

  const ScalarField* stream() const { return stream_.get(); }
  void set_stream(std::shared_ptr<const ScalarField> psi) { stream_ = std::move(psi); }

  bool all_finite() const { return u1_.all_finite() && u2_.all_finite(); }

  VectorField& operator+=(const VectorField& o) {
    u1_ += o.u1_;
    u2_ += o.u2_;
    stream_.reset();
    return *this;
  }
  VectorField& operator-=(const VectorField& o) {
    u1_ -= o.u1_;
    u2_ -= o.u2_;
    stream_.reset();
    return *this;
  }
  VectorField& operator*=(double a) {
    u1_ *= a;
    u2_ *= a;
    stream_.reset();
    return *this;
  }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }

 private:
  ScalarField u1_;
  ScalarField u2_;
  bool tangent_;
  std::shared_ptr<const ScalarField> stream_;
};

// Ordered samples on [0, T].
template <typename T>
class TimeSeries {
 public:
  void push_back(double t, T value) {
    if (!times_.empty() && !(t > times_.back())) {
      throw std::invalid_argument("time series instants must be strictly increasing");
    }
    times_.push_back(t);
    entries_.push_back(std::move(value));
  }

  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<T>& entries() const { return entries_; }
  const T& operator[](std::size_t k) const { return entries_[k]; }
  double time(std::size_t k) const { return times_[k]; }

  // Common step when the instants are uniform to 1e-9 relative, else NaN.
  double uniform_step() const {
    if (times_.size() < 2) return std::nan("");
    const double span = times_.back() - times_.front();
    const double dt = span / static_cast<double>(times_.size() - 1);
    for (std::size_t k = 1; k < times_.size(); ++k) {
      if (std::abs((times_[k] - times_[k - 1]) - dt) > 1e-9 * std::max(1.0, span)) return std::nan("");
    }
    return dt;
  }

 private:
  std::vector<double> times_;
  std::vector<T> entries_;
};

}  // namespace eul2d
