#pragma once

// Sample statistics for ensemble estimates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "eul2d/norms.hpp"

namespace eul2d {

inline double mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("mean of an empty sample");
  return pairwise_sum(x) / static_cast<double>(x.size());
}

// Unbiased sample variance; 0 for a single value.
inline double variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  std::vector<double> d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = (x[i] - m) * (x[i] - m);
  return pairwise_sum(d) / static_cast<double>(x.size() - 1);
}

inline double standard_error(std::span<const double> x) {
  return std::sqrt(variance(x) / static_cast<double>(x.size()));
}

struct Interval {
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double width() const { return upper - lower; }
};

// Percentile bootstrap interval for the mean. The resampling stream is seeded
// explicitly, so the interval is a deterministic function of the sample.
inline Interval bootstrap_mean(std::span<const double> x, int resamples = 2000, double level = 0.95,
                               std::uint64_t seed = 1) {
  if (x.empty()) throw std::invalid_argument("bootstrap of an empty sample");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("confidence level must lie in (0, 1)");
  if (resamples < 1) throw std::invalid_argument("bootstrap needs at least one resample");
  Interval out;
  out.estimate = mean(x);
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
  std::vector<double> stats(static_cast<std::size_t>(resamples));
  std::vector<double> draw(x.size());
  for (auto& s : stats) {
    for (auto& d : draw) d = x[pick(gen)];
    s = mean(draw);
  }
  std::sort(stats.begin(), stats.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(stats.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, stats.size() - 1);
    return stats[lo] + (pos - static_cast<double>(lo)) * (stats[hi] - stats[lo]);
  };
  out.lower = quantile(0.5 * (1.0 - level));
  out.upper = quantile(0.5 * (1.0 + level));
  return out;
}

// Least-squares slope of y against x.
inline double fit_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope fit needs two or more paired points");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("slope fit needs distinct abscissae");
  return sxy / sxx;
}

inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("log-log fit needs positive data");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return fit_slope(lx, ly);
}

}  // namespace eul2d
