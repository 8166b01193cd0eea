#pragma once

// Ergodic averages A_t f(x) = mean of f over the closed ball (or cube) of
// radius t around x, evaluated on a ladder of radii, and the operators built
// from them: short variations S_k, their 3Q-smoothed versions, the smoothed
// square function, R_k and its smoothed l^r aggregate, plus the discrete
// geometric counts behind the single-scale estimates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "varlab/error.hpp"
#include "varlab/field_ops.hpp"
#include "varlab/lattice.hpp"
#include "varlab/martingale.hpp"
#include "varlab/variation.hpp"

namespace varlab {

/// Radii t = 2^k (1 + m/M), m = 0..M-1, for k_min <= k <= k_max, closed by
/// 2^{k_max+1}. Level k owns the M+1 radii from 2^k to 2^{k+1} inclusive, so
/// neighbouring levels share an endpoint.
struct ScaleSet {
  int k_min = 0;
  int k_max = 0;
  int M = 8;
  Kernel kernel = Kernel::ball;

  int levels() const { return k_max - k_min + 1; }

  void validate(const GridSpec& grid) const {
    require(k_min >= 0 && k_max >= k_min, "scale levels must satisfy 0 <= k_min <= k_max");
    require(M >= 4, "intra-scale refinement M must be at least 4");
    require(grid.K() >= 2 && k_max + 1 <= grid.K() - 2, "largest radius 2^(k_max+1) must not exceed 2^(K-2)");
  }

  std::vector<double> radii() const {
    std::vector<double> out;
    for (int k = k_min; k <= k_max; ++k)
      for (int m = 0; m < M; ++m) out.push_back(std::ldexp(1.0 + double(m) / M, k));
    out.push_back(std::ldexp(1.0, k_max + 1));
    return out;
  }

  /// Index of the first radius (2^k) of level k in radii().
  std::size_t first_index(int k) const {
    require(k >= k_min && k <= k_max, "level missing from scale set");
    return std::size_t(k - k_min) * std::size_t(M);
  }
};

struct AvgStack {
  ScaleSet scales;
  std::vector<double> radii;
  std::vector<Field> slices;
  Field source;

  std::size_t size() const { return slices.size(); }

  /// Path t -> A_t f_i(x) over the radii [first, last].
  void path(std::size_t x, std::size_t component, std::size_t first, std::size_t last,
            std::vector<double>& out) const {
    out.resize(last - first + 1);
    for (std::size_t r = first; r <= last; ++r) out[r - first] = slices[r].component(component)[x];
  }
};

inline double ergodic_avg_at(const TorusPrefix& prefix, Point x, const KernelShape& shape, Kernel kernel) {
  if (kernel == Kernel::cube && prefix.grid().d() == 2) {
    const int h = shape.reach;
    return prefix.box_sum({x[0] - h, x[1] - h}, {2 * h + 1, 2 * h + 1}) / double(shape.volume);
  }
  return kernel_sum(prefix, x, shape) / double(shape.volume);
}

namespace detail {

inline void average_into(const Field& f, const std::vector<TorusPrefix>& prefixes, const KernelShape& shape,
                         Kernel kernel, Field& out) {
  const GridSpec& g = f.grid();
  for (std::size_t i = 0; i < f.family_size(); ++i) {
    auto dst = out.component(i);
    for (std::size_t x = 0; x < g.size(); ++x) dst[x] = ergodic_avg_at(prefixes[i], g.point(x), shape, kernel);
  }
}

inline std::vector<TorusPrefix> prefixes_of(const Field& f) {
  std::vector<TorusPrefix> out;
  out.reserve(f.family_size());
  for (std::size_t i = 0; i < f.family_size(); ++i) out.emplace_back(f.grid(), f.component(i));
  return out;
}

}  // namespace detail

inline Field ergodic_avg(const Field& f, double t, Kernel kernel = Kernel::ball) {
  require_radius_fits(f.grid(), t);
  Field out(f.grid(), f.family_size());
  detail::average_into(f, detail::prefixes_of(f), kernel_shape(f.grid().d(), t, kernel), kernel, out);
  return out;
}

inline AvgStack avg_stack(const Field& f, const ScaleSet& scales) {
  scales.validate(f.grid());
  AvgStack st;
  st.scales = scales;
  st.radii = scales.radii();
  st.source = f;
  const auto prefixes = detail::prefixes_of(f);
  st.slices.reserve(st.radii.size());
  for (double t : st.radii) {
    Field slice(f.grid(), f.family_size());
    detail::average_into(f, prefixes, kernel_shape(f.grid().d(), t, scales.kernel), scales.kernel, slice);
    st.slices.push_back(std::move(slice));
  }
  return st;
}

/// Max of a field over the concentric (factor x side) cube of the level-k
/// dyadic cube containing each point, per component.
inline Field cube_neighborhood_max(const Field& v, int k, int factor = 3) {
  const GridSpec& g = v.grid();
  require(k >= 0 && k <= g.K(), "smoothing level out of range");
  require(factor >= 1 && factor % 2 == 1, "enlargement factor must be odd");
  const int per_axis = 1 << (g.K() - k);
  const int reach = (factor - 1) / 2;
  const std::size_t ncubes = dyadic_cube_count(g, k);
  Field out(g, v.family_size());
  std::vector<double> cube_max(ncubes), smoothed(ncubes);
  for (std::size_t i = 0; i < v.family_size(); ++i) {
    auto src = v.component(i);
    std::fill(cube_max.begin(), cube_max.end(), -std::numeric_limits<double>::infinity());
    for (std::size_t x = 0; x < g.size(); ++x) {
      double& m = cube_max[detail::cube_index_of(g, x, k)];
      m = std::max(m, src[x]);
    }
    auto wrap = [&](int c) { return ((c % per_axis) + per_axis) % per_axis; };
    for (std::size_t c = 0; c < ncubes; ++c) {
      const int cx = int(c % std::size_t(per_axis));
      const int cy = g.d() == 2 ? int(c / std::size_t(per_axis)) : 0;
      double m = -std::numeric_limits<double>::infinity();
      const int ry = g.d() == 2 ? reach : 0;
      for (int dy = -ry; dy <= ry; ++dy)
        for (int dx = -reach; dx <= reach; ++dx) {
          const std::size_t nb = std::size_t(wrap(cx + dx)) + (g.d() == 2 ? std::size_t(wrap(cy + dy)) * per_axis : 0);
          m = std::max(m, cube_max[nb]);
        }
      smoothed[c] = m;
    }
    auto dst = out.component(i);
    for (std::size_t x = 0; x < g.size(); ++x) dst[x] = smoothed[detail::cube_index_of(g, x, k)];
  }
  return out;
}

/// S_k f(x): inhomogeneous 2-variation of t -> A_t f(x) - E_k f(x) over the
/// radii of level k.
inline Field short_variation(const AvgStack& stack, int k) {
  const std::size_t first = stack.scales.first_index(k);
  const std::size_t last = first + std::size_t(stack.scales.M);
  const Field ek = cond_expect(stack.source, k);
  const GridSpec& g = stack.source.grid();
  Field out(g, stack.source.family_size());
  std::vector<double> path;
  for (std::size_t i = 0; i < out.family_size(); ++i) {
    auto dst = out.component(i);
    auto e = ek.component(i);
    for (std::size_t x = 0; x < g.size(); ++x) {
      stack.path(x, i, first, last, path);
      for (double& v : path) v -= e[x];
      dst[x] = var_inhom_value(path, 2.0);
    }
  }
  return out;
}

inline Field smoothed_short_variation(const Field& sv, int k) { return cube_neighborhood_max(sv, k, 3); }

inline Field square_function(const AvgStack& stack) {
  const GridSpec& g = stack.source.grid();
  Field acc(g, stack.source.family_size());
  for (int k = stack.scales.k_min; k <= stack.scales.k_max; ++k) {
    const Field s = smoothed_short_variation(short_variation(stack, k), k);
    for (std::size_t i = 0; i < acc.values().size(); ++i) acc[i] += s[i] * s[i];
  }
  for (double& v : acc.values()) v = std::sqrt(v);
  return acc;
}

inline Field square_function(const Field& f, const ScaleSet& scales) { return square_function(avg_stack(f, scales)); }

/// R_k b(x): inhomogeneous r-variation of t -> A_t b(x) over level-k radii.
inline Field rk_operator(const AvgStack& stack, int k, double r) {
  require(r > 1 && std::isfinite(r), "R_k needs 1 < r < infinity");
  const std::size_t first = stack.scales.first_index(k);
  const std::size_t last = first + std::size_t(stack.scales.M);
  const GridSpec& g = stack.source.grid();
  Field out(g, stack.source.family_size());
  std::vector<double> path;
  for (std::size_t i = 0; i < out.family_size(); ++i) {
    auto dst = out.component(i);
    for (std::size_t x = 0; x < g.size(); ++x) {
      stack.path(x, i, first, last, path);
      dst[x] = var_inhom_value(path, r);
    }
  }
  return out;
}

inline Field frak_r_k(const AvgStack& stack, int k, double r) {
  return cube_neighborhood_max(rk_operator(stack, k, r), k, 3);
}

/// (sum_k frak_r_k(b)^r)^{1/r} over the levels of the stack.
inline Field frak_r(const AvgStack& stack, double r) {
  const GridSpec& g = stack.source.grid();
  Field acc(g, stack.source.family_size());
  for (int k = stack.scales.k_min; k <= stack.scales.k_max; ++k) {
    const Field s = frak_r_k(stack, k, r);
    for (std::size_t i = 0; i < acc.values().size(); ++i) acc[i] += std::pow(s[i], r);
  }
  for (double& v : acc.values()) v = std::pow(v, 1.0 / r);
  return acc;
}

inline Field frak_r(const Field& b, double r, const ScaleSet& scales) { return frak_r(avg_stack(b, scales), r); }

// ---------------------------------------------------------------------------
// Discrete geometry of balls (on Z^d; the torus agrees while 2t < 2^K)

/// Number of level-(k+i) dyadic cubes containing lattice points both inside
/// and outside the closed ball B(x, t).
inline std::size_t boundary_cube_count(int d, Point x, double t, int k, int i) {
  require(d == 1 || d == 2, "dimension must be 1 or 2");
  require(i <= 0 && k + i >= 0, "need i <= 0 and k + i >= 0");
  require(t >= std::ldexp(1.0, k) && t <= std::ldexp(1.0, k + 1), "radius must lie in [2^k, 2^(k+1)]");
  const long s = 1L << (k + i);
  const double t2 = t * t;
  const long R = long(std::floor(t)) + 1;
  auto floor_div = [](long a, long b) { return a >= 0 ? a / b : -((-a + b - 1) / b); };
  auto axis = [&](int c, long lo, long& dmin, long& dmax) {
    const long hi = lo + s - 1;
    const long cl = std::clamp<long>(c, lo, hi);
    dmin = std::abs(c - cl);
    dmax = std::max(std::abs(c - lo), std::abs(c - hi));
  };
  std::size_t count = 0;
  const long a0 = floor_div(x[0] - R, s), a1 = floor_div(x[0] + R, s);
  const long b0 = d == 2 ? floor_div(x[1] - R, s) : 0, b1 = d == 2 ? floor_div(x[1] + R, s) : 0;
  for (long b = b0; b <= b1; ++b)
    for (long a = a0; a <= a1; ++a) {
      long mn0, mx0, mn1 = 0, mx1 = 0;
      axis(x[0], a * s, mn0, mx0);
      if (d == 2) axis(x[1], b * s, mn1, mx1);
      const double dmin2 = double(mn0 * mn0 + mn1 * mn1);
      const double dmax2 = double(mx0 * mx0 + mx1 * mx1);
      count += (dmin2 <= t2 && dmax2 > t2);
    }
  return count;
}

/// |B(x,t) symmetric-difference B(y,t)| counted in lattice points of Z^d.
inline std::size_t ball_symm_diff(int d, Point x, Point y, double t) {
  require(d == 1 || d == 2, "dimension must be 1 or 2");
  const KernelShape s = kernel_shape(d, t);
  auto overlap = [](long a0, long a1, long b0, long b1) { return std::max(0L, std::min(a1, b1) - std::max(a0, b0) + 1); };
  if (d == 1) {
    const long h = s.half_width[0];
    const long len = 2 * h + 1;
    return std::size_t(2 * (len - overlap(x[0] - h, x[0] + h, y[0] - h, y[0] + h)));
  }
  std::size_t total = 0;
  const int lo = std::min(x[1], y[1]) - s.reach, hi = std::max(x[1], y[1]) + s.reach;
  for (int row = lo; row <= hi; ++row) {
    long la = 0, lb = 0, ov = 0;
    const int dyx = row - x[1], dyy = row - y[1];
    const bool in_x = std::abs(dyx) <= s.reach, in_y = std::abs(dyy) <= s.reach;
    long ax0 = 0, ax1 = -1, by0 = 0, by1 = -1;
    if (in_x) { ax0 = x[0] - s.width(dyx); ax1 = x[0] + s.width(dyx); la = ax1 - ax0 + 1; }
    if (in_y) { by0 = y[0] - s.width(dyy); by1 = y[0] + s.width(dyy); lb = by1 - by0 + 1; }
    if (in_x && in_y) ov = overlap(ax0, ax1, by0, by1);
    total += std::size_t(la + lb - 2 * ov);
  }
  return total;
}

struct ShellCheck {
  double inner_radius = 0;
  double outer_radius = 0;
  double inner_sum = 0;
  double outer_sum = 0;
  double shell_sum = 0;
  std::size_t shell_points = 0;
  double discrepancy = 0;  // outer - inner - shell
};

/// Sum of b over B(x,t') minus the sum over B(x,t) against the sum over the
/// discrete shell B(x,t') \ B(x,t), all by direct summation.
inline ShellCheck shell_derivative_check(const Field& b, Point x, double t, double t_outer) {
  require(t < t_outer, "shell needs t < t'");
  const GridSpec& g = b.grid();
  const auto inner = ball_points(g, x, t);
  const auto outer = ball_points(g, x, t_outer);
  ShellCheck c;
  c.inner_radius = t;
  c.outer_radius = t_outer;
  std::vector<std::size_t> in_idx;
  for (const Point& p : inner) {
    c.inner_sum += b.at(p);
    in_idx.push_back(g.index(p));
  }
  std::sort(in_idx.begin(), in_idx.end());
  for (const Point& p : outer) {
    c.outer_sum += b.at(p);
    if (!std::binary_search(in_idx.begin(), in_idx.end(), g.index(p))) {
      c.shell_sum += b.at(p);
      ++c.shell_points;
    }
  }
  c.discrepancy = c.outer_sum - c.inner_sum - c.shell_sum;
  return c;
}

/// Shell checks for every pair of consecutive radii of level k.
inline std::vector<ShellCheck> shell_derivative_check(const Field& b, Point x, const ScaleSet& scales, int k) {
  scales.validate(b.grid());
  const auto radii = scales.radii();
  const std::size_t first = scales.first_index(k);
  std::vector<ShellCheck> out;
  for (std::size_t r = first; r < first + std::size_t(scales.M); ++r)
    out.push_back(shell_derivative_check(b, x, radii[r], radii[r + 1]));
  return out;
}

}  // namespace varlab
