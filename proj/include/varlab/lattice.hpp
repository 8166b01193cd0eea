#pragma once

// Discrete geometry on the periodic lattice (Z / 2^K Z)^d, d in {1, 2}:
// grids, dyadic cubes, concentric enlargements, closed Euclidean balls, and
// the Field container every other module operates on.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "varlab/error.hpp"

namespace varlab {

/// Lattice point. Coordinates beyond the grid dimension are ignored (kept 0).
using Point = std::array<int, 2>;

class GridSpec {
 public:
  GridSpec() = default;
  GridSpec(int d, int K) : d_(d), K_(K) {
    require(d == 1 || d == 2, "grid dimension must be 1 or 2");
    require(K >= 1 && K * d <= 24, "grid level K out of range (1 <= K, d*K <= 24)");
  }

  int d() const { return d_; }
  int K() const { return K_; }
  int side() const { return 1 << K_; }
  std::size_t size() const { return d_ == 1 ? std::size_t(side()) : std::size_t(side()) * side(); }

  int wrap(int c) const { return c & (side() - 1); }
  Point wrap(Point p) const {
    Point q{wrap(p[0]), 0};
    if (d_ == 2) q[1] = wrap(p[1]);
    return q;
  }
  std::size_t index(Point p) const {
    p = wrap(p);
    return std::size_t(p[0]) + (d_ == 2 ? std::size_t(p[1]) * side() : 0);
  }
  Point point(std::size_t idx) const {
    if (d_ == 1) return {int(idx), 0};
    return {int(idx % side()), int(idx / side())};
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  int d_ = 1;
  int K_ = 4;
};

/// Dyadic cube of side 2^k whose corner coordinates are multiples of 2^k.
struct CubeRef {
  int k = 0;
  Point corner{0, 0};

  int side() const { return 1 << k; }
  std::size_t volume(int d) const { return std::size_t(1) << (k * d); }
  friend bool operator==(const CubeRef&, const CubeRef&) = default;
};

/// Real-valued samples on a grid, optionally a finite family f_i (component
/// major: component i occupies values[i*N, (i+1)*N)).
class Field {
 public:
  Field() = default;
  explicit Field(GridSpec grid, std::size_t family_size = 1, double fill = 0.0)
      : grid_(grid), family_(family_size), values_(grid.size() * family_size, fill) {
    require(family_size >= 1, "family size must be at least 1");
  }
  Field(GridSpec grid, std::vector<double> values, std::size_t family_size = 1)
      : grid_(grid), family_(family_size), values_(std::move(values)) {
    require(family_size >= 1, "family size must be at least 1");
    require(values_.size() == grid_.size() * family_, "field value count does not match grid");
    for (double v : values_) require(std::isfinite(v), "field values must be finite");
  }

  const GridSpec& grid() const { return grid_; }
  std::size_t family_size() const { return family_; }
  std::size_t points() const { return grid_.size(); }

  std::span<double> component(std::size_t i = 0) {
    return {values_.data() + i * points(), points()};
  }
  std::span<const double> component(std::size_t i = 0) const {
    return {values_.data() + i * points(), points()};
  }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double& operator[](std::size_t idx) { return values_[idx]; }
  double operator[](std::size_t idx) const { return values_[idx]; }
  double& at(Point p, std::size_t i = 0) { return values_[i * points() + grid_.index(p)]; }
  double at(Point p, std::size_t i = 0) const { return values_[i * points() + grid_.index(p)]; }

  /// Scalar field holding component i.
  Field extract(std::size_t i) const {
    auto c = component(i);
    return Field(grid_, std::vector<double>(c.begin(), c.end()));
  }

 private:
  GridSpec grid_;
  std::size_t family_ = 1;
  std::vector<double> values_;
};

inline void require_same_grid(const Field& a, const Field& b) {
  require(a.grid() == b.grid(), "fields live on different grids");
}

// ---------------------------------------------------------------------------
// Dyadic cubes

inline CubeRef dyadic_cube_of(const GridSpec& grid, Point x, int k) {
  require(k >= 0 && k <= grid.K(), "dyadic level out of range");
  x = grid.wrap(x);
  const int mask = ~((1 << k) - 1);
  CubeRef q{k, {x[0] & mask, 0}};
  if (grid.d() == 2) q.corner[1] = x[1] & mask;
  return q;
}

/// Linear index of the level-k dyadic cube containing x among the
/// (2^{K-k})^d cubes of that level.
inline std::size_t dyadic_cube_index(const GridSpec& grid, Point x, int k) {
  x = grid.wrap(x);
  const std::size_t per_axis = std::size_t(1) << (grid.K() - k);
  std::size_t idx = std::size_t(x[0] >> k);
  if (grid.d() == 2) idx += std::size_t(x[1] >> k) * per_axis;
  return idx;
}

inline std::size_t dyadic_cube_count(const GridSpec& grid, int k) {
  const std::size_t per_axis = std::size_t(1) << (grid.K() - k);
  return grid.d() == 1 ? per_axis : per_axis * per_axis;
}

inline CubeRef dyadic_cube_at(const GridSpec& grid, int k, std::size_t cube_index) {
  const std::size_t per_axis = std::size_t(1) << (grid.K() - k);
  CubeRef q{k, {int(cube_index % per_axis) << k, 0}};
  if (grid.d() == 2) q.corner[1] = int(cube_index / per_axis) << k;
  return q;
}

/// Grid indices of the points of an axis-parallel cube [corner, corner+side)^d,
/// wrapped periodically; duplicates removed when the cube exceeds the torus.
inline std::vector<std::size_t> box_points(const GridSpec& grid, Point corner, int side) {
  const int L = grid.side();
  const int span = std::min(side, L);
  std::vector<std::size_t> out;
  if (grid.d() == 1) {
    out.reserve(span);
    for (int a = 0; a < span; ++a) out.push_back(grid.index({corner[0] + a, 0}));
  } else {
    out.reserve(std::size_t(span) * span);
    for (int b = 0; b < span; ++b)
      for (int a = 0; a < span; ++a) out.push_back(grid.index({corner[0] + a, corner[1] + b}));
  }
  if (side > L) {
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return out;
}

inline std::vector<std::size_t> cube_points(const GridSpec& grid, const CubeRef& q) {
  return box_points(grid, q.corner, q.side());
}

/// Points of the concentric cube with `factor` times the side of q
/// (factor odd), wrapped periodically.
inline std::vector<std::size_t> concentric_cube(const GridSpec& grid, const CubeRef& q, int factor) {
  require(factor >= 1 && factor % 2 == 1, "enlargement factor must be odd");
  const int shift = (factor - 1) / 2 * q.side();
  Point corner{q.corner[0] - shift, grid.d() == 2 ? q.corner[1] - shift : 0};
  return box_points(grid, corner, factor * q.side());
}

inline std::vector<std::size_t> concentric_3Q(const GridSpec& grid, const CubeRef& q) {
  return concentric_cube(grid, q, 3);
}

// ---------------------------------------------------------------------------
// Balls

/// Largest integer h >= 0 with h*h <= v (v a non-negative value that may be
/// fractional); exact for integer and dyadic-rational inputs.
inline int floor_sqrt(double v) {
  if (v < 0) return -1;
  long h = static_cast<long>(std::floor(std::sqrt(v)));
  while (double(h + 1) * double(h + 1) <= v) ++h;
  while (h > 0 && double(h) * double(h) > v) --h;
  return int(h);
}

/// Row decomposition of a symmetric kernel: for every row offset dy in
/// [-reach, reach] the kernel covers dx in [-half_width, half_width].
/// In d = 1 there is a single row.
struct KernelShape {
  double radius = 0;
  int reach = 0;
  std::vector<int> half_width;
  std::size_t volume = 0;

  int width(int dy) const { return half_width[std::size_t(dy + reach)]; }
};

enum class Kernel { ball, cube };

inline std::string to_string(Kernel k) { return k == Kernel::ball ? "ball" : "cube"; }

/// Closed Euclidean ball (|y|^2 <= t^2, compared exactly on squared
/// distances) or the cube [-t, t]^d, intersected with the lattice.
inline KernelShape kernel_shape(int d, double t, Kernel kernel = Kernel::ball) {
  require(t > 0 && std::isfinite(t), "radius must be positive");
  KernelShape s;
  s.radius = t;
  const int h = floor_sqrt(t * t);
  if (d == 1) {
    s.reach = 0;
    s.half_width = {h};
    s.volume = std::size_t(2 * h + 1);
    return s;
  }
  s.reach = h;
  s.half_width.resize(std::size_t(2 * h + 1));
  for (int dy = -h; dy <= h; ++dy) {
    const int w = kernel == Kernel::ball ? floor_sqrt(t * t - double(dy) * dy) : h;
    s.half_width[std::size_t(dy + h)] = w;
    s.volume += std::size_t(2 * w + 1);
  }
  return s;
}

inline void require_radius_fits(const GridSpec& grid, double t) {
  require(t > 0 && t <= double(1 << std::max(0, grid.K() - 2)) && grid.K() >= 2,
          "radius out of range: need 0 < t <= 2^(K-2)");
}

/// Lattice points y with |y - x| <= t on the torus.
inline std::vector<Point> ball_points(const GridSpec& grid, Point x, double t) {
  require_radius_fits(grid, t);
  const KernelShape s = kernel_shape(grid.d(), t);
  std::vector<Point> out;
  out.reserve(s.volume);
  for (int dy = -s.reach; dy <= s.reach; ++dy) {
    const int w = s.width(dy);
    for (int dx = -w; dx <= w; ++dx) out.push_back(grid.wrap(Point{x[0] + dx, x[1] + dy}));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Periodic prefix sums

/// Prefix sums of one scalar component supporting wrapped box and row sums.
class TorusPrefix {
 public:
  TorusPrefix(const GridSpec& grid, std::span<const double> v) : grid_(grid), L_(grid.side()) {
    require(v.size() == grid.size(), "prefix input size mismatch");
    if (grid.d() == 1) {
      rows_.assign(std::size_t(L_) + 1, 0.0);
      for (int x = 0; x < L_; ++x) rows_[x + 1] = rows_[x] + v[x];
      return;
    }
    const std::size_t stride = std::size_t(L_) + 1;
    rows_.assign(std::size_t(L_) * stride, 0.0);
    table_.assign(stride * stride, 0.0);
    for (int y = 0; y < L_; ++y) {
      double* r = &rows_[std::size_t(y) * stride];
      for (int x = 0; x < L_; ++x) r[x + 1] = r[x] + v[std::size_t(y) * L_ + x];
    }
    for (int y = 0; y < L_; ++y)
      for (int x = 0; x <= L_; ++x)
        table_[std::size_t(y + 1) * stride + x] =
            table_[std::size_t(y) * stride + x] + rows_[std::size_t(y) * stride + x];
  }

  const GridSpec& grid() const { return grid_; }

  /// Sum over x in [lo, lo+len) on row `row` (row ignored in d = 1), len <= L.
  double row_sum(int row, int lo, int len) const {
    const double* r = grid_.d() == 1 ? rows_.data()
                                     : &rows_[std::size_t(grid_.wrap(row)) * (std::size_t(L_) + 1)];
    const int a = grid_.wrap(lo);
    if (a + len <= L_) return r[a + len] - r[a];
    return (r[L_] - r[a]) + r[a + len - L_];
  }

  /// Sum over the wrapped box [lo, lo+ext)^d, ext entries in [1, L].
  double box_sum(Point lo, std::array<int, 2> ext) const {
    if (grid_.d() == 1) return row_sum(0, lo[0], ext[0]);
    double total = 0;
    for_segments(lo[1], ext[1], [&](int y0, int y1) {
      for_segments(lo[0], ext[0], [&](int x0, int x1) { total += rect(x0, x1, y0, y1); });
    });
    return total;
  }

 private:
  template <typename Fn>
  void for_segments(int lo, int len, Fn&& fn) const {
    const int a = grid_.wrap(lo);
    if (a + len <= L_) {
      fn(a, a + len);
    } else {
      fn(a, L_);
      fn(0, a + len - L_);
    }
  }
  double rect(int x0, int x1, int y0, int y1) const {
    const std::size_t s = std::size_t(L_) + 1;
    return table_[y1 * s + x1] - table_[y0 * s + x1] - table_[y1 * s + x0] + table_[y0 * s + x0];
  }

  GridSpec grid_;
  int L_;
  std::vector<double> rows_;
  std::vector<double> table_;
};

/// Sum of f over the kernel of the given shape centered at x.
inline double kernel_sum(const TorusPrefix& prefix, Point x, const KernelShape& s) {
  double total = 0;
  for (int dy = -s.reach; dy <= s.reach; ++dy) {
    const int w = s.width(dy);
    total += prefix.row_sum(x[1] + dy, x[0] - w, 2 * w + 1);
  }
  return total;
}

}  // namespace varlab
