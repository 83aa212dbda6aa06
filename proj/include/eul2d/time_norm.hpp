#pragma once

// Fractional Sobolev norm in time,
//
//   |u|^p = int_0^T |u(t)|^p dt + int int |u(t)-u(s)|^p / |t-s|^(1+gamma p) dt ds,
//
// for a uniformly sampled path. Both integrals use the trapezoid rule; the
// diagonal t = s of the double integral is left out.
//
// Grouping the double sum by lag m = |i-j| gives band sums B_m ~ b(m dt),
// where b(tau) is the integrand integrated along the line t - s = tau. When
// b(tau) ~ A tau^alpha near the diagonal (alpha = -2 gamma for Brownian paths)
// the omitted band is worth -zeta(-alpha) * b(dt) * dt by the generalized
// Euler-Maclaurin formula. DiagonalRule::extrapolate adds that term with
// alpha estimated from B_2 / B_1.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/zeta.hpp>

#include "eul2d/field.hpp"
#include "eul2d/norms.hpp"

namespace eul2d {

enum class DiagonalRule { exclude, extrapolate };

struct FractionalNormParts {
  double dt = 0.0;
  double integral_term = 0.0;  // int |u|^p dt
  double double_term = 0.0;    // off-diagonal trapezoid of the double integral
  double band1 = 0.0;          // B_1
  double band2 = 0.0;          // B_2
  double diagonal_correction = 0.0;

  double power() const { return integral_term + double_term + diagonal_correction; }
};

// -zeta(-alpha) * B_1 * dt, with alpha = log2(B_2 / B_1) clamped to [-0.95, 4].
inline double diagonal_band_correction(double band1, double band2, double dt) {
  if (!(band1 > 0.0) || !(band2 > 0.0)) return 0.0;
  const double alpha = std::clamp(std::log2(band2 / band1), -0.95, 4.0);
  return -boost::math::zeta(-alpha) * band1 * dt;
}

namespace detail {

inline void check_fractional_args(std::size_t samples, double gamma, double p) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("fractional order gamma must lie in (0, 1)");
  }
  if (!(p > 1.0)) throw std::invalid_argument("fractional norm needs p > 1");
  if (samples < 3) throw std::invalid_argument("fractional norm needs at least 3 time samples");
}

}  // namespace detail

// `norm` maps an entry (or a difference of entries) to its spatial norm.
template <typename T, typename Norm>
FractionalNormParts fractional_time_norm_parts(const TimeSeries<T>& series, double gamma, double p, Norm&& norm,
                                               DiagonalRule rule = DiagonalRule::exclude) {
  detail::check_fractional_args(series.size(), gamma, p);
  const double dt = series.uniform_step();
  if (!std::isfinite(dt)) throw std::invalid_argument("fractional norm needs a uniform time grid");

  const std::size_t m = series.size();
  auto w = [m](std::size_t i) { return (i == 0 || i + 1 == m) ? 0.5 : 1.0; };

  auto powp = [p](double v) { return p == 2.0 ? v * v : std::pow(v, p); };

  FractionalNormParts parts;
  parts.dt = dt;
  std::vector<double> terms(m);
  for (std::size_t i = 0; i < m; ++i) terms[i] = w(i) * powp(norm(series[i]));
  parts.integral_term = dt * pairwise_sum(terms);

  const double expo = 1.0 + gamma * p;
  std::vector<double> bands(m, 0.0);
  std::vector<double> band_terms;
  band_terms.reserve(m);
  for (std::size_t lag = 1; lag < m; ++lag) {
    band_terms.clear();
    const double kernel = 1.0 / std::pow(static_cast<double>(lag) * dt, expo);
    for (std::size_t i = 0; i + lag < m; ++i) {
      const T diff = series[i + lag] - series[i];
      band_terms.push_back(w(i) * w(i + lag) * powp(norm(diff)) * kernel);
    }
    bands[lag] = 2.0 * dt * pairwise_sum(band_terms);
  }
  parts.double_term = dt * pairwise_sum(std::span<const double>(bands).subspan(1));
  parts.band1 = bands[1];
  parts.band2 = bands[2];
  if (rule == DiagonalRule::extrapolate) {
    parts.diagonal_correction = diagonal_band_correction(parts.band1, parts.band2, dt);
  }
  return parts;
}

template <typename T, typename Norm>
double fractional_time_norm(const TimeSeries<T>& series, double gamma, double p, Norm&& norm,
                            DiagonalRule rule = DiagonalRule::exclude) {
  const auto parts = fractional_time_norm_parts(series, gamma, p, std::forward<Norm>(norm), rule);
  return std::pow(std::max(parts.power(), 0.0), 1.0 / p);
}

inline double fractional_time_norm(const TimeSeries<double>& series, double gamma, double p,
                                   DiagonalRule rule = DiagonalRule::exclude) {
  return fractional_time_norm(series, gamma, p, [](double v) { return std::abs(v); }, rule);
}

enum class SpatialNorm { l2, h1, linf };

inline double fractional_time_norm(const TimeSeries<ScalarField>& series, double gamma, double p,
                                   SpatialNorm spatial, DiagonalRule rule = DiagonalRule::exclude) {
  auto norm = [spatial](const ScalarField& f) {
    switch (spatial) {
      case SpatialNorm::l2: return lp_norm(f, 2.0);
      case SpatialNorm::h1: return h1_norm(f);
      case SpatialNorm::linf: return linf_norm(f);
    }
    return 0.0;
  };
  return fractional_time_norm(series, gamma, p, norm, rule);
}

}  // namespace eul2d
