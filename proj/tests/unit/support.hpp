#pragma once

// Seeded generators and brute-force oracles shared by the unit tests. Each
// test owns its generator stream, so a failure reproduces from its seed.

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "varlab/lattice.hpp"

namespace varlab::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>()(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  std::vector<double> normals(std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = normal();
    return v;
  }

  /// Small integer values make ties and repeated levels common.
  std::vector<double> lattice_values(std::size_t n, int span) {
    std::vector<double> v(n);
    for (double& x : v) x = integer(-span, span);
    return v;
  }

  Field field(const GridSpec& g, std::size_t family = 1) { return Field(g, normals(g.size() * family), family); }

  Point point(const GridSpec& g) { return {integer(0, g.side() - 1), g.d() == 2 ? integer(0, g.side() - 1) : 0}; }

 private:
  std::mt19937_64 rng_;
};

/// Squared torus distance from x to y.
inline long torus_dist2(const GridSpec& g, Point x, Point y) {
  long s = 0;
  for (int a = 0; a < g.d(); ++a) {
    const int diff = g.wrap(y[a] - x[a]);
    const long m = std::min(diff, g.side() - diff);
    s += m * m;
  }
  return s;
}

/// Closed ball by scanning every grid point.
inline std::set<std::size_t> ball_scan(const GridSpec& g, Point x, double t) {
  std::set<std::size_t> out;
  for (std::size_t p = 0; p < g.size(); ++p)
    if (double(torus_dist2(g, x, g.point(p))) <= t * t) out.insert(p);
  return out;
}

}  // namespace varlab::testing
