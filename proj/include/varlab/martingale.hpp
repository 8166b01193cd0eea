#pragma once

// Dyadic martingale on the periodic grid. Level convention: E_k averages over
// dyadic cubes of side 2^k, so larger k is coarser, E_0 = identity and E_K is
// the global mean. Martingale differences are d_k = E_k f - E_{k+1} f.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "varlab/error.hpp"
#include "varlab/field_ops.hpp"
#include "varlab/lattice.hpp"
#include "varlab/variation.hpp"

namespace varlab {

namespace detail {

inline std::size_t cube_index_of(const GridSpec& g, std::size_t idx, int k) {
  if (g.d() == 1) return idx >> k;
  const std::size_t L = std::size_t(g.side());
  const std::size_t x = idx & (L - 1), y = idx >> g.K();
  return (x >> k) + (y >> k) * (L >> k);
}

}  // namespace detail

inline Field cond_expect(const Field& f, int k) {
  const GridSpec& g = f.grid();
  require(k >= 0 && k <= g.K(), "conditional expectation level out of range");
  Field out(g, f.family_size());
  const std::size_t n = f.points();
  std::vector<double> sums(dyadic_cube_count(g, k));
  const double volume = double(std::size_t(1) << (k * g.d()));
  for (std::size_t i = 0; i < f.family_size(); ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    auto src = f.component(i);
    for (std::size_t x = 0; x < n; ++x) sums[detail::cube_index_of(g, x, k)] += src[x];
    auto dst = out.component(i);
    for (std::size_t x = 0; x < n; ++x) dst[x] = sums[detail::cube_index_of(g, x, k)] / volume;
  }
  return out;
}

struct MartingaleDecomposition {
  Field source;
  std::vector<Field> expectations;  // E_0 f, ..., E_K f
  std::vector<Field> diffs;         // d_0, ..., d_{K-1}
  Field top;                        // E_K f

  int levels() const { return int(diffs.size()); }
};

inline MartingaleDecomposition mart_decompose(const Field& f) {
  MartingaleDecomposition dec;
  dec.source = f;
  const int K = f.grid().K();
  dec.expectations.reserve(std::size_t(K) + 1);
  dec.expectations.push_back(f);
  for (int k = 1; k <= K; ++k) dec.expectations.push_back(cond_expect(dec.expectations.back(), k));
  for (int k = 0; k < K; ++k) dec.diffs.push_back(dec.expectations[k] - dec.expectations[k + 1]);
  dec.top = dec.expectations.back();
  return dec;
}

inline Field mart_square_function(const Field& f) {
  const MartingaleDecomposition dec = mart_decompose(f);
  Field out(f.grid(), f.family_size());
  for (const Field& d : dec.diffs)
    for (std::size_t i = 0; i < out.values().size(); ++i) out[i] += d[i] * d[i];
  for (double& v : out.values()) v = std::sqrt(v);
  return out;
}

// ---------------------------------------------------------------------------
// Sign multipliers

/// One scalar sign field per level k = 0..K-1.
using LevelSigns = std::vector<Field>;

inline void validate_level_signs(const GridSpec& g, const LevelSigns& signs) {
  require(int(signs.size()) == g.K(), "need one sign field per martingale level");
  for (int k = 0; k < g.K(); ++k) {
    const Field& s = signs[std::size_t(k)];
    require(s.grid() == g && s.family_size() == 1, "sign field has wrong shape");
    for (std::size_t x = 0; x < s.points(); ++x) {
      require(s[x] == 1.0 || s[x] == -1.0, "sign fields must take values +1 or -1");
      const CubeRef q = dyadic_cube_of(g, g.point(x), k);
      require(s[x] == s.at(q.corner), "sign field must be constant on dyadic cubes of its level");
    }
  }
}

inline Field haar_multiplier(const MartingaleDecomposition& dec, const LevelSigns& signs) {
  validate_level_signs(dec.source.grid(), signs);
  Field out = dec.top;
  for (std::size_t k = 0; k < dec.diffs.size(); ++k) {
    for (std::size_t i = 0; i < out.family_size(); ++i) {
      auto dst = out.component(i);
      auto d = dec.diffs[k].component(i);
      for (std::size_t x = 0; x < dst.size(); ++x) dst[x] += signs[k][x] * d[x];
    }
  }
  return out;
}

inline Field haar_multiplier(const Field& f, const LevelSigns& signs) {
  return haar_multiplier(mart_decompose(f), signs);
}

inline LevelSigns constant_level_signs(const GridSpec& g, const std::vector<int>& per_level) {
  require(int(per_level.size()) == g.K(), "need one sign per level");
  LevelSigns out;
  for (int s : per_level) {
    require(s == 1 || s == -1, "signs must be +1 or -1");
    out.emplace_back(g, 1, double(s));
  }
  return out;
}

/// Seeded signs, one draw per (level, dyadic cube) in cube-index order.
inline LevelSigns random_level_signs(const GridSpec& g, std::uint64_t seed) {
  LevelSigns out;
  for (int k = 0; k < g.K(); ++k) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + std::uint64_t(k));
    std::bernoulli_distribution coin(0.5);
    std::vector<double> draw(dyadic_cube_count(g, k));
    for (double& v : draw) v = coin(rng) ? 1.0 : -1.0;
    Field s(g);
    for (std::size_t x = 0; x < s.points(); ++x) s[x] = draw[detail::cube_index_of(g, x, k)];
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Haar atoms

struct HaarAtom {
  CubeRef cube;
  std::vector<double> values;  // in cube_points order
};

struct HaarAtoms {
  int diff_level = 0;  // the martingale difference d_{diff_level} that was split
  std::vector<HaarAtom> atoms;
  Field carrier;  // sum_Q 1_Q ||d 1_Q||_inf

  /// The atoms summed into one field (their supports are disjoint).
  Field atoms_field() const {
    Field out(carrier.grid());
    for (const HaarAtom& a : atoms) {
      const auto pts = cube_points(out.grid(), a.cube);
      for (std::size_t i = 0; i < pts.size(); ++i) out[pts[i]] = a.values[i];
    }
    return out;
  }
};

/// Splits d_{k+j} into L^inf-normalized Haar atoms on the level-(k+j+1)
/// cubes and the carrier of their sup norms. Scalar decompositions only.
inline HaarAtoms haar_atoms_from_diff(const MartingaleDecomposition& dec, int k, int j) {
  const int level = k + j;
  require(level >= 0 && level + 1 <= dec.levels(), "Haar atom level out of range");
  require(dec.source.family_size() == 1, "Haar atoms need a scalar field");
  const GridSpec& g = dec.source.grid();
  const Field& d = dec.diffs[std::size_t(level)];
  HaarAtoms out;
  out.diff_level = level;
  out.carrier = Field(g);
  const int cube_level = level + 1;
  for (std::size_t c = 0; c < dyadic_cube_count(g, cube_level); ++c) {
    HaarAtom atom{dyadic_cube_at(g, cube_level, c), {}};
    const auto pts = cube_points(g, atom.cube);
    double sup = 0;
    for (std::size_t p : pts) sup = std::max(sup, std::abs(d[p]));
    atom.values.resize(pts.size(), 0.0);
    if (sup > 0)
      for (std::size_t i = 0; i < pts.size(); ++i) atom.values[i] = d[pts[i]] / sup;
    for (std::size_t p : pts) out.carrier[p] = sup;
    out.atoms.push_back(std::move(atom));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Calderon-Zygmund decomposition

struct CZResult {
  GridSpec grid;
  std::size_t family_size = 1;
  double threshold = 1;
  double q = 2;
  Field magnitude;  // F = (sum_i |f_i|^q)^{1/q}
  std::vector<CubeRef> cubes;
  Field good;
  std::vector<std::vector<double>> bad_atoms;  // per cube, component-major over cube_points

  Field atom_field(std::size_t c) const {
    Field out(grid, family_size);
    const auto pts = cube_points(grid, cubes[c]);
    for (std::size_t i = 0; i < family_size; ++i)
      for (std::size_t p = 0; p < pts.size(); ++p) out.component(i)[pts[p]] = bad_atoms[c][i * pts.size() + p];
    return out;
  }

  Field bad_field() const {
    Field out(grid, family_size);
    for (std::size_t c = 0; c < cubes.size(); ++c) {
      const auto pts = cube_points(grid, cubes[c]);
      for (std::size_t i = 0; i < family_size; ++i)
        for (std::size_t p = 0; p < pts.size(); ++p) out.component(i)[pts[p]] = bad_atoms[c][i * pts.size() + p];
    }
    return out;
  }

  /// Indicator of the union of the selected cubes.
  std::vector<char> covered() const {
    std::vector<char> mask(grid.size(), 0);
    for (const CubeRef& q : cubes)
      for (std::size_t p : cube_points(grid, q)) mask[p] = 1;
    return mask;
  }
};

/// Maximal dyadic cubes (scanned coarse to fine) on which the mean of F
/// exceeds the threshold; requires the global mean of F not to exceed it.
inline CZResult cz_decompose(const Field& f, double threshold, double q) {
  require(threshold > 0 && std::isfinite(threshold), "Calderon-Zygmund threshold must be positive");
  require(q >= 1, "q must be at least 1");
  const GridSpec& g = f.grid();
  CZResult res;
  res.grid = g;
  res.family_size = f.family_size();
  res.threshold = threshold;
  res.q = q;
  res.magnitude = lq_magnitude(f, q);
  const std::size_t n = g.size();
  require(sum(res.magnitude.values()) / double(n) <= threshold,
          "threshold below the global mean of the magnitude; decomposition degenerate");

  std::vector<char> taken(n, 0);
  for (int k = g.K(); k >= 0; --k) {
    const Field means = cond_expect(res.magnitude, k);
    for (std::size_t c = 0; c < dyadic_cube_count(g, k); ++c) {
      const CubeRef cube = dyadic_cube_at(g, k, c);
      const std::size_t corner = g.index(cube.corner);
      if (taken[corner] || !(means[corner] > threshold)) continue;
      res.cubes.push_back(cube);
      for (std::size_t p : cube_points(g, cube)) taken[p] = 1;
    }
  }

  res.good = f;
  for (const CubeRef& cube : res.cubes) {
    const auto pts = cube_points(g, cube);
    std::vector<double> atom(pts.size() * res.family_size);
    for (std::size_t i = 0; i < res.family_size; ++i) {
      auto src = f.component(i);
      double s = 0;
      for (std::size_t p : pts) s += src[p];
      const double mean = s / double(pts.size());
      auto dst = res.good.component(i);
      for (std::size_t p = 0; p < pts.size(); ++p) {
        atom[i * pts.size() + p] = src[pts[p]] - mean;
        dst[pts[p]] = mean;
      }
    }
    res.bad_atoms.push_back(std::move(atom));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Stopping times

/// Per point, the levels at which the anchored greedy scan of
/// k -> E_k f(x), run from the coarsest level K down to 0, re-anchors.
/// Levels are listed in visiting order (decreasing k, i.e. refining).
struct StoppingTimes {
  GridSpec grid;
  double lambda = 0;
  std::vector<std::vector<int>> levels;
};

inline bool has_stopping_property(const StoppingTimes& st) {
  const GridSpec& g = st.grid;
  std::size_t depth = 0;
  for (const auto& v : st.levels) depth = std::max(depth, v.size());
  auto level_at = [&](std::size_t x, std::size_t j) {
    return j < st.levels[x].size() ? st.levels[x][j] : -1;
  };
  for (std::size_t j = 0; j < depth; ++j)
    for (std::size_t x = 0; x < g.size(); ++x)
      for (int t = 0; t <= g.K(); ++t) {
        const std::size_t corner = g.index(dyadic_cube_of(g, g.point(x), t).corner);
        if ((level_at(x, j) == t) != (level_at(corner, j) == t)) return false;
      }
  return true;
}

inline StoppingTimes greedy_stopping_times(const MartingaleDecomposition& dec, double lambda) {
  require(lambda > 0 && std::isfinite(lambda), "stopping threshold must be positive");
  require(dec.source.family_size() == 1, "stopping times need a scalar field");
  const GridSpec& g = dec.source.grid();
  const int K = g.K();
  StoppingTimes st{g, lambda, std::vector<std::vector<int>>(g.size())};
  std::vector<double> path(std::size_t(K) + 1);
  for (std::size_t x = 0; x < g.size(); ++x) {
    for (int i = 0; i <= K; ++i) path[std::size_t(i)] = dec.expectations[std::size_t(K - i)][x];
    for (std::size_t i : anchored_greedy_jumps(path, lambda)) st.levels[x].push_back(K - int(i));
  }
  ensure(has_stopping_property(st), "greedy selection produced a non-stopping time");
  return st;
}

inline StoppingTimes greedy_stopping_times(const Field& f, double lambda) {
  return greedy_stopping_times(mart_decompose(f), lambda);
}

/// Signs eps_k(x) = r_{j(x,k)} with j(x,k) the number of stopping levels of x
/// above k, so that sum_k eps_k d_k groups the differences between
/// consecutive stopping levels under one Rademacher sign each.
inline LevelSigns stopping_time_signs(const StoppingTimes& st, const std::vector<int>& rademacher) {
  const GridSpec& g = st.grid;
  LevelSigns out;
  for (int k = 0; k < g.K(); ++k) {
    Field s(g);
    for (std::size_t x = 0; x < g.size(); ++x) {
      std::size_t j = 0;
      for (int t : st.levels[x]) j += t > k;
      require(j < rademacher.size(), "not enough Rademacher signs for the stopping times");
      s[x] = double(rademacher[j]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace varlab
