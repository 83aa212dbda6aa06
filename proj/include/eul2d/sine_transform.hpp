#pragma once

// Two-dimensional type-I discrete sine transform through FFTW (RODFT00).
//
//   Y[k,l] = 4 sum_{i,j} X[i,j] sin(pi (i+1)(k+1)/(N+1)) sin(pi (j+1)(l+1)/(N+1))
//
// The transform is its own inverse up to the factor 4 (N+1)^2. Columns of the
// transform matrix are the eigenvectors of the 5-point Dirichlet Laplacian.

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "eul2d/field.hpp"

namespace eul2d {

namespace detail {

// FFTW's planner is not reentrant.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
};

}  // namespace detail

class SineTransform {
 public:
  explicit SineTransform(const Grid& g) : grid_(g) {
    const int n = g.n();
    std::vector<double> a(g.size()), b(g.size());
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_plan p = fftw_plan_r2r_2d(n, n, a.data(), b.data(), FFTW_RODFT00, FFTW_RODFT00,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (p == nullptr) throw std::runtime_error("FFTW could not plan a sine transform");
    plan_.reset(p);
    const fftw_r2r_kind kind = FFTW_RODFT00;
    fftw_plan r = fftw_plan_many_r2r(1, &n, n, a.data(), nullptr, 1, n, b.data(), nullptr, 1, n, &kind,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (r == nullptr) throw std::runtime_error("FFTW could not plan a sine transform");
    rows_.reset(r);
  }

  const Grid& grid() const { return grid_; }

  // Unnormalized forward transform. Plans are executed with the new-array
  // interface, which is safe from several threads at once.
  std::vector<double> forward(std::span<const double> x) const {
    if (x.size() != grid_.size()) throw std::invalid_argument("sine transform input has the wrong size");
    std::vector<double> in(x.begin(), x.end());
    std::vector<double> out(x.size());
    fftw_execute_r2r(plan_.get(), in.data(), out.data());
    return out;
  }

  // Inverse of forward().
  std::vector<double> inverse(std::span<const double> y) const {
    auto x = forward(y);
    const double scale = 1.0 / (4.0 * square(grid_.n() + 1));
    for (double& v : x) v *= scale;
    return x;
  }

  // One-dimensional transform along x of every row j:
  //   Y[k,j] = 2 sum_i X[i,j] sin(pi (i+1)(k+1)/(N+1)).
  std::vector<double> forward_x(std::span<const double> x) const {
    if (x.size() != grid_.size()) throw std::invalid_argument("sine transform input has the wrong size");
    std::vector<double> in(x.begin(), x.end());
    std::vector<double> out(x.size());
    fftw_execute_r2r(rows_.get(), in.data(), out.data());
    return out;
  }

  std::vector<double> inverse_x(std::span<const double> y) const {
    auto x = forward_x(y);
    const double scale = 1.0 / (2.0 * (grid_.n() + 1));
    for (double& v : x) v *= scale;
    return x;
  }

  // Eigenvalue of -Delta_h for mode index (k, l), 0-based.
  double eigenvalue(int k, int l) const {
    const double h = grid_.h();
    const double sk = std::sin(0.5 * (k + 1) * std::numbers::pi * h);
    const double sl = std::sin(0.5 * (l + 1) * std::numbers::pi * h);
    return 4.0 / (h * h) * (sk * sk + sl * sl);
  }

  // |X|^2 in the discrete L2 norm, from its coefficients Y.
  double l2_weight() const {
    const double m = square(grid_.n() + 1);
    return 1.0 / (4.0 * m * m);
  }

 private:
  static double square(int v) { return static_cast<double>(v) * static_cast<double>(v); }

  Grid grid_;
  std::unique_ptr<fftw_plan_s, detail::FftwPlanDeleter> plan_;
  std::unique_ptr<fftw_plan_s, detail::FftwPlanDeleter> rows_;
};

}  // namespace eul2d
