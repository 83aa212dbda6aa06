#pragma once

// Seeded random streams and Brownian paths.
//
// A stream is std::mt19937_64 seeded with splitmix64(master ^ splitmix64(id)).
// Ensemble runs use id = path * 1024 + mode, so every Brownian motion of every
// path is reproducible on its own.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "eul2d/field.hpp"

namespace eul2d {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t stream_id(std::uint64_t path, std::uint64_t mode) { return path * 1024 + mode; }

class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t id)
      : master_(master_seed), id_(id), engine_(splitmix64(master_seed ^ splitmix64(id))) {}

  std::uint64_t master_seed() const { return master_; }
  std::uint64_t id() const { return id_; }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t bits() { return engine_(); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t master_;
  std::uint64_t id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// Number of steps T/dt, which must be an integer up to rounding.
inline std::size_t step_count(double T, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  if (!(T > 0.0)) throw std::invalid_argument("horizon must be positive");
  const double r = T / dt;
  const double n = std::round(r);
  if (n < 1.0 || std::abs(r - n) > 1e-9 * std::max(1.0, r)) {
    throw std::invalid_argument("horizon T is not an integer multiple of dt");
  }
  return static_cast<std::size_t>(n);
}

// Brownian path on t_n = n dt, n = 0..T/dt, with W(0) = 0.
//
// When the step count is a power of two the path is built by Levy bridge
// refinement (endpoint first, then midpoints level by level), so the path for
// dt/2 drawn from the same stream contains the path for dt at its even nodes.
// Otherwise increments are drawn in order.
inline TimeSeries<double> sample_brownian_path(RngStream& rng, double T, double dt) {
  const std::size_t n = step_count(T, dt);
  std::vector<double> w(n + 1, 0.0);
  if ((n & (n - 1)) == 0) {
    w[n] = std::sqrt(T) * rng.normal();
    for (std::size_t stride = n; stride > 1; stride /= 2) {
      const std::size_t half = stride / 2;
      const double sd = std::sqrt(0.25 * static_cast<double>(stride) * dt);
      for (std::size_t a = 0; a < n; a += stride) {
        w[a + half] = 0.5 * (w[a] + w[a + stride]) + sd * rng.normal();
      }
    }
  } else {
    const double sd = std::sqrt(dt);
    for (std::size_t k = 1; k <= n; ++k) w[k] = w[k - 1] + sd * rng.normal();
  }
  TimeSeries<double> out;
  for (std::size_t k = 0; k <= n; ++k) out.push_back(static_cast<double>(k) * dt, w[k]);
  return out;
}

}  // namespace eul2d
