#pragma once

// Seeded input ensembles. Trial t of an ensemble depends only on
// (seed, generator, grid, family_size, t).

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "varlab/error.hpp"
#include "varlab/lattice.hpp"

namespace varlab::harness {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
  return splitmix64(splitmix64(seed) ^ (trial * 0xd1342543de82ef95ULL + 1));
}

inline const std::vector<std::string>& generator_names() {
  static const std::vector<std::string> names{"gaussian-field", "sparse-spikes", "lacunary", "haar-noise",
                                              "smooth-bump"};
  return names;
}

struct Ensemble {
  std::uint64_t seed = 1;
  std::size_t count = 16;
  std::string generator = "gaussian-field";
  GridSpec grid{1, 10};
  std::size_t family_size = 1;

  void validate() const {
    require(count >= 1, "ensemble count must be positive");
    require(family_size >= 1, "ensemble family_size must be positive");
    bool known = false;
    for (const auto& n : generator_names()) known = known || n == generator;
    require(known, "unknown ensemble generator '" + generator + "'");
  }
};

namespace detail {

inline void fill_gaussian(std::span<double> c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (double& v : c) v = n(rng);
}

inline void fill_spikes(const GridSpec& g, std::span<double> c, std::mt19937_64& rng) {
  const std::size_t spikes = std::max<std::size_t>(1, g.size() / 128);
  std::uniform_int_distribution<std::size_t> at(0, g.size() - 1);
  std::normal_distribution<double> n(0.0, 8.0);
  for (std::size_t s = 0; s < spikes; ++s) c[at(rng)] += n(rng);
}

/// Nested dyadic blocks around a random point with heights +-2^{-m/2}.
inline void fill_lacunary(const GridSpec& g, std::span<double> c, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> at(0, g.size() - 1);
  std::bernoulli_distribution coin(0.5);
  const Point x0 = g.point(at(rng));
  for (int m = 0; m < g.K(); ++m) {
    const double h = (coin(rng) ? 1.0 : -1.0) * std::pow(2.0, -0.5 * m);
    for (std::size_t p : cube_points(g, dyadic_cube_of(g, x0, m))) c[p] += h;
  }
}

/// Random Haar coefficients on every dyadic cube of level 1..K, split along
/// the first coordinate.
inline void fill_haar(const GridSpec& g, std::span<double> c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 1; k <= g.K(); ++k) {
    std::vector<double> xi(dyadic_cube_count(g, k));
    for (double& v : xi) v = n(rng);
    const int half = 1 << (k - 1);
    for (std::size_t p = 0; p < g.size(); ++p) {
      const Point x = g.point(p);
      const double s = (x[0] & half) ? -1.0 : 1.0;
      c[p] += s * xi[dyadic_cube_index(g, x, k)];
    }
  }
}

inline void fill_bumps(const GridSpec& g, std::span<double> c, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> at(0, g.size() - 1);
  std::uniform_real_distribution<double> logw(1.0, std::max(1.5, double(g.K()) - 2.0));
  std::normal_distribution<double> amp(0.0, 1.0);
  const int L = g.side();
  for (int b = 0; b < 3; ++b) {
    const Point ctr = g.point(at(rng));
    const double sigma = std::exp2(logw(rng));
    const double a = amp(rng);
    for (std::size_t p = 0; p < g.size(); ++p) {
      const Point x = g.point(p);
      const double dx = std::min(g.wrap(x[0] - ctr[0]), L - g.wrap(x[0] - ctr[0]));
      const double dy = g.d() == 2 ? std::min(g.wrap(x[1] - ctr[1]), L - g.wrap(x[1] - ctr[1])) : 0.0;
      c[p] += a * std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
    }
  }
}

}  // namespace detail

inline Field make_trial(const Ensemble& e, std::size_t trial) {
  e.validate();
  std::mt19937_64 rng(trial_seed(e.seed, trial));
  Field f(e.grid, e.family_size);
  for (std::size_t i = 0; i < e.family_size; ++i) {
    auto c = f.component(i);
    if (e.generator == "gaussian-field") detail::fill_gaussian(c, rng);
    else if (e.generator == "sparse-spikes") detail::fill_spikes(e.grid, c, rng);
    else if (e.generator == "lacunary") detail::fill_lacunary(e.grid, c, rng);
    else if (e.generator == "haar-noise") detail::fill_haar(e.grid, c, rng);
    else detail::fill_bumps(e.grid, c, rng);
  }
  return f;
}

inline std::vector<Field> make_ensemble(const Ensemble& e) {
  std::vector<Field> out;
  out.reserve(e.count);
  for (std::size_t t = 0; t < e.count; ++t) out.push_back(make_trial(e, t));
  return out;
}

}  // namespace varlab::harness
