#pragma once

// Muckenhoupt weight diagnostics over a configurable family of cubes on the
// torus, maximal and sharp maximal functions, weighted norms, BMO.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "varlab/error.hpp"
#include "varlab/field_ops.hpp"
#include "varlab/lattice.hpp"

namespace varlab {

/// exhaustive: every axis-parallel lattice cube of every side (wrapping);
/// dyadic: the dyadic cubes; dyadic_shifted: dyadic cubes plus the dyadic
/// grids translated by half a side in any subset of the coordinates.
enum class CubeFamily { exhaustive, dyadic, dyadic_shifted };

inline CubeFamily default_cube_family(int d) { return d == 1 ? CubeFamily::exhaustive : CubeFamily::dyadic_shifted; }

inline std::string to_string(CubeFamily f) {
  switch (f) {
    case CubeFamily::exhaustive: return "exhaustive";
    case CubeFamily::dyadic: return "dyadic";
    case CubeFamily::dyadic_shifted: return "dyadic_shifted";
  }
  return "?";
}

namespace detail {

inline std::vector<Point> family_shifts(int d, int k, CubeFamily family) {
  if (family == CubeFamily::dyadic || k == 0) return {Point{0, 0}};
  const int h = 1 << (k - 1);
  if (d == 1) return {Point{0, 0}, Point{h, 0}};
  return {Point{0, 0}, Point{h, 0}, Point{0, h}, Point{h, h}};
}

/// Circular sliding-window maximum: out[x] = max_{a in [x-w+1, x]} in[a mod n].
inline void circular_window_max(const double* in, std::size_t stride, int n, int w, double* out, std::size_t out_stride) {
  std::deque<int> dq;
  auto val = [&](int a) { return in[std::size_t(((a % n) + n) % n) * stride]; };
  for (int a = -w + 1; a < n; ++a) {
    while (!dq.empty() && val(dq.back()) <= val(a)) dq.pop_back();
    dq.push_back(a);
    while (dq.front() <= a - w) dq.pop_front();
    if (a >= 0) out[std::size_t(a) * out_stride] = val(dq.front());
  }
}

}  // namespace detail

/// Calls fn(corner, side) for every cube of the family.
template <typename Fn>
void for_each_cube(const GridSpec& g, CubeFamily family, Fn&& fn) {
  const int L = g.side();
  if (family == CubeFamily::exhaustive) {
    for (int side = 1; side <= L; ++side)
      for (std::size_t c = 0; c < g.size(); ++c) fn(g.point(c), side);
    return;
  }
  for (int k = 0; k <= g.K(); ++k) {
    const int per_axis = L >> k;
    for (const Point& s : detail::family_shifts(g.d(), k, family))
      for (int b = 0; b < (g.d() == 2 ? per_axis : 1); ++b)
        for (int a = 0; a < per_axis; ++a) fn(Point{s[0] + (a << k), g.d() == 2 ? s[1] + (b << k) : 0}, 1 << k);
  }
}

/// Pointwise sup over the cubes of the family containing each point of
/// value(corner, side).
inline Field sup_over_cubes(const GridSpec& g, CubeFamily family,
                            const std::function<double(Point, int)>& value) {
  const int L = g.side();
  Field out(g, 1, -std::numeric_limits<double>::infinity());
  if (family == CubeFamily::exhaustive) {
    std::vector<double> v(g.size()), tmp(g.size());
    for (int side = 1; side <= L; ++side) {
      for (std::size_t c = 0; c < g.size(); ++c) v[c] = value(g.point(c), side);
      if (g.d() == 1) {
        detail::circular_window_max(v.data(), 1, L, side, tmp.data(), 1);
      } else {
        std::vector<double> rows(g.size());
        for (int y = 0; y < L; ++y)
          detail::circular_window_max(&v[std::size_t(y) * L], 1, L, side, &rows[std::size_t(y) * L], 1);
        for (int x = 0; x < L; ++x) detail::circular_window_max(&rows[std::size_t(x)], std::size_t(L), L, side, &tmp[std::size_t(x)], std::size_t(L));
      }
      for (std::size_t p = 0; p < g.size(); ++p) out[p] = std::max(out[p], tmp[p]);
    }
    return out;
  }
  for (int k = 0; k <= g.K(); ++k) {
    const int per_axis = L >> k;
    for (const Point& s : detail::family_shifts(g.d(), k, family)) {
      std::vector<double> v(std::size_t(per_axis) * (g.d() == 2 ? per_axis : 1));
      for (int b = 0; b < (g.d() == 2 ? per_axis : 1); ++b)
        for (int a = 0; a < per_axis; ++a)
          v[std::size_t(b) * per_axis + a] = value(Point{s[0] + (a << k), g.d() == 2 ? s[1] + (b << k) : 0}, 1 << k);
      for (std::size_t p = 0; p < g.size(); ++p) {
        const Point x = g.point(p);
        const int a = g.wrap(x[0] - s[0]) >> k;
        const int b = g.d() == 2 ? g.wrap(x[1] - s[1]) >> k : 0;
        out[p] = std::max(out[p], v[std::size_t(b) * per_axis + a]);
      }
    }
  }
  return out;
}

inline std::array<int, 2> cube_extent(const GridSpec& g, int side) { return {side, g.d() == 2 ? side : 1}; }

inline double cube_volume(const GridSpec& g, int side) { return g.d() == 2 ? double(side) * side : double(side); }

/// Number of distinct torus points of a cube of the given side.
inline std::size_t box_points_count(const GridSpec& g, int side) {
  const std::size_t s = std::size_t(std::min(side, g.side()));
  return g.d() == 2 ? s * s : s;
}

// ---------------------------------------------------------------------------
// Maximal functions

inline Field maximal(const Field& f, double p, CubeFamily family) {
  require(p >= 1 && std::isfinite(p), "maximal function exponent must satisfy p >= 1");
  const GridSpec& g = f.grid();
  std::vector<double> powered(g.size());
  for (std::size_t x = 0; x < g.size(); ++x) powered[x] = std::pow(std::abs(f[x]), p);
  const TorusPrefix prefix(g, powered);
  return sup_over_cubes(g, family, [&](Point c, int side) {
    return std::pow(prefix.box_sum(c, cube_extent(g, side)) / cube_volume(g, side), 1.0 / p);
  });
}

inline Field maximal(const Field& f, double p = 1.0) { return maximal(f, p, default_cube_family(f.grid().d())); }

/// inf over c of (mean_Q |f - c|^p)^{1/p}, evaluated at the cube mean and the
/// (lower) cube median, taking the smaller.
inline double cube_oscillation(const Field& f, Point corner, int side, double p, std::vector<double>& buf) {
  const GridSpec& g = f.grid();
  const auto pts = box_points(g, corner, side);
  buf.resize(pts.size());
  double mean = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    buf[i] = f[pts[i]];
    mean += buf[i];
  }
  mean /= double(pts.size());
  auto moment = [&](double c) {
    double s = 0;
    if (p == 1.0) {
      for (double v : buf) s += std::abs(v - c);
      return s / double(buf.size());
    }
    for (double v : buf) s += std::pow(std::abs(v - c), p);
    return std::pow(s / double(buf.size()), 1.0 / p);
  };
  const double at_mean = moment(mean);
  std::nth_element(buf.begin(), buf.begin() + std::ptrdiff_t((buf.size() - 1) / 2), buf.end());
  const double median = buf[(buf.size() - 1) / 2];
  return std::min(at_mean, moment(median));
}

inline Field sharp_maximal(const Field& f, double p, CubeFamily family) {
  require(p >= 1 && std::isfinite(p), "sharp maximal function exponent must satisfy p >= 1");
  const GridSpec& g = f.grid();
  if (p == 2.0) {
    // The mean is the exact minimizer for p = 2: the value is the cube standard deviation.
    std::vector<double> sq(g.size());
    for (std::size_t x = 0; x < g.size(); ++x) sq[x] = f[x] * f[x];
    const TorusPrefix s1(g, f.component(0)), s2(g, sq);
    return sup_over_cubes(g, family, [&](Point c, int side) {
      const double vol = double(box_points_count(g, side));
      const double m = s1.box_sum(c, cube_extent(g, std::min(side, g.side()))) / vol;
      const double m2 = s2.box_sum(c, cube_extent(g, std::min(side, g.side()))) / vol;
      return std::sqrt(std::max(0.0, m2 - m * m));
    });
  }
  std::vector<double> buf;
  return sup_over_cubes(f.grid(), family, [&](Point c, int side) { return cube_oscillation(f, c, side, p, buf); });
}

inline Field sharp_maximal(const Field& f, double p = 1.0) {
  return sharp_maximal(f, p, default_cube_family(f.grid().d()));
}

// ---------------------------------------------------------------------------
// Weights

struct Weight {
  Field field;
  std::string family = "flat";

  Weight() = default;
  Weight(Field w, std::string label) : field(std::move(w)), family(std::move(label)) {
    require(field.family_size() == 1, "weights are scalar fields");
    for (double v : field.values()) require(v > 0 && std::isfinite(v), "weights must be strictly positive");
  }
  const GridSpec& grid() const { return field.grid(); }
  double operator[](std::size_t x) const { return field[x]; }
};

inline Weight flat_weight(const GridSpec& g) { return Weight(Field(g, 1, 1.0), "flat"); }

/// (1 + |x|)^alpha with |x| the distance to the origin on the torus.
inline Weight power_weight(const GridSpec& g, double alpha) {
  Field w(g);
  const int L = g.side();
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Point x = g.point(p);
    const double a = std::min(x[0], L - x[0]);
    const double b = g.d() == 2 ? std::min(x[1], L - x[1]) : 0.0;
    w[p] = std::pow(1.0 + std::sqrt(a * a + b * b), alpha);
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "power(%g)", alpha);
  return Weight(std::move(w), buf);
}

/// lo on the half x_0 < L/2, hi on the other half.
inline Weight two_value_weight(const GridSpec& g, double lo = 1.0, double hi = 4.0) {
  Field w(g);
  for (std::size_t p = 0; p < g.size(); ++p) w[p] = g.point(p)[0] < g.side() / 2 ? lo : hi;
  return Weight(std::move(w), "two-value");
}

/// exp of a normalized random dyadic sum, bounded in [e^{-3/4}, e^{3/4}].
inline Weight random_ap_weight(const GridSpec& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Field h(g);
  for (int k = 0; k < g.K(); ++k) {
    std::vector<double> xi(dyadic_cube_count(g, k));
    for (double& v : xi) v = u(rng);
    for (std::size_t p = 0; p < g.size(); ++p) h[p] += xi[dyadic_cube_index(g, g.point(p), k)];
  }
  const double m = std::max(max_abs(h.values()), 1e-300);
  for (double& v : h.values()) v = std::exp(0.75 * v / m);
  return Weight(std::move(h), "random-Ap(" + std::to_string(seed) + ")");
}

inline double a1_constant(const Weight& w, CubeFamily family) {
  const Field mw = maximal(w.field, 1.0, family);
  double sup = 0;
  for (std::size_t x = 0; x < mw.points(); ++x) sup = std::max(sup, mw[x] / w[x]);
  return sup;
}

inline double a1_constant(const Weight& w) { return a1_constant(w, default_cube_family(w.grid().d())); }

inline double ap_constant(const Weight& w, double p, CubeFamily family) {
  require(p > 1 && std::isfinite(p), "A_p constant needs 1 < p < infinity");
  const GridSpec& g = w.grid();
  std::vector<double> dual(g.size());
  for (std::size_t x = 0; x < g.size(); ++x) dual[x] = std::pow(w[x], -1.0 / (p - 1.0));
  const TorusPrefix pw(g, w.field.values()), pd(g, dual);
  double sup = 0;
  for_each_cube(g, family, [&](Point c, int side) {
    const double vol = cube_volume(g, side);
    const double a = pw.box_sum(c, cube_extent(g, side)) / vol;
    const double b = pd.box_sum(c, cube_extent(g, side)) / vol;
    sup = std::max(sup, a * std::pow(b, p - 1.0));
  });
  return sup;
}

inline double ap_constant(const Weight& w, double p) { return ap_constant(w, p, default_cube_family(w.grid().d())); }

// ---------------------------------------------------------------------------
// A_infinity envelope

struct AinftySample {
  double volume_ratio;  // |E| / |Q|
  double weight_ratio;  // w(E) / w(Q)
};

struct AinftyFit {
  double C = 1;
  double delta = 1;
  std::size_t samples = 0;
};

struct AinftyOptions {
  std::uint64_t seed = 1;
  int depths = 3;
  int random_unions = 50;
  std::size_t cubes_per_level = 16;
};

/// Pairs (Q, E) with Q dyadic of level >= depths and E a union of dyadic
/// subcubes: every single subcube at depths 1..depths plus seeded random
/// unions.
inline std::vector<AinftySample> ainfty_samples(const Weight& w, const AinftyOptions& opt = {}) {
  const GridSpec& g = w.grid();
  require(g.K() >= opt.depths, "grid too small for the requested subcube depth");
  const TorusPrefix pw(g, w.field.values());
  std::mt19937_64 rng(opt.seed);
  std::vector<AinftySample> out;
  for (int kq = opt.depths; kq <= g.K(); ++kq) {
    std::vector<std::size_t> chosen(dyadic_cube_count(g, kq));
    for (std::size_t i = 0; i < chosen.size(); ++i) chosen[i] = i;
    if (chosen.size() > opt.cubes_per_level) {
      std::shuffle(chosen.begin(), chosen.end(), rng);
      chosen.resize(opt.cubes_per_level);
      std::sort(chosen.begin(), chosen.end());
    }
    for (std::size_t qi : chosen) {
      const CubeRef Q = dyadic_cube_at(g, kq, qi);
      const double wq = pw.box_sum(Q.corner, cube_extent(g, Q.side()));
      auto subcubes = [&](int depth) {
        std::vector<CubeRef> subs;
        const int k = kq - depth, n = 1 << depth;
        for (int b = 0; b < (g.d() == 2 ? n : 1); ++b)
          for (int a = 0; a < n; ++a)
            subs.push_back({k, {Q.corner[0] + (a << k), g.d() == 2 ? Q.corner[1] + (b << k) : 0}});
        return subs;
      };
      for (int depth = 1; depth <= opt.depths; ++depth) {
        const auto subs = subcubes(depth);
        const double vr = 1.0 / double(subs.size());
        for (const CubeRef& s : subs) out.push_back({vr, pw.box_sum(s.corner, cube_extent(g, s.side())) / wq});
      }
      std::uniform_int_distribution<int> pick_depth(1, opt.depths);
      std::bernoulli_distribution coin(0.5);
      for (int u = 0; u < opt.random_unions; ++u) {
        const auto subs = subcubes(pick_depth(rng));
        double we = 0;
        std::size_t taken = 0;
        for (const CubeRef& s : subs)
          if (coin(rng)) {
            we += pw.box_sum(s.corner, cube_extent(g, s.side()));
            ++taken;
          }
        if (taken == 0 || taken == subs.size()) continue;
        out.push_back({double(taken) / double(subs.size()), we / wq});
      }
    }
  }
  return out;
}

/// Largest delta in (0, 1] with w(E)/w(Q) <= C (|E|/|Q|)^delta over the
/// sample at the smallest admissible constant C = 1 (forced by E = Q).
inline AinftyFit ainfty_fit_from(const std::vector<AinftySample>& samples) {
  AinftyFit fit;
  fit.samples = samples.size();
  double delta = 1.0;
  for (const AinftySample& s : samples) {
    if (s.volume_ratio >= 1.0) continue;
    delta = std::min(delta, std::log(s.weight_ratio) / std::log(s.volume_ratio));
  }
  fit.delta = delta;
  double C = 1.0;
  for (const AinftySample& s : samples)
    C = std::max(C, s.weight_ratio / std::pow(s.volume_ratio, delta));
  fit.C = C;
  return fit;
}

inline AinftyFit ainfty_fit(const Weight& w, const AinftyOptions& opt = {}) {
  return ainfty_fit_from(ainfty_samples(w, opt));
}

struct WeightConstants {
  double a1 = 1;
  std::map<double, double> ap;
  AinftyFit ainfty;
  CubeFamily cube_family = CubeFamily::exhaustive;
};

inline WeightConstants weight_constants(const Weight& w, const std::vector<double>& ps, CubeFamily family) {
  WeightConstants c;
  c.cube_family = family;
  c.a1 = a1_constant(w, family);
  for (double p : ps) c.ap[p] = ap_constant(w, p, family);
  c.ainfty = ainfty_fit(w);
  return c;
}

// ---------------------------------------------------------------------------
// Weighted norms

inline double weighted_lp_norm(const Field& f, const Weight& w, double p) {
  require(p >= 1 && std::isfinite(p), "weighted norm exponent must satisfy p >= 1");
  require(f.grid() == w.grid(), "field and weight live on different grids");
  const Field mag = lq_magnitude(f, 2.0);
  double s = 0;
  for (std::size_t x = 0; x < mag.points(); ++x) s += std::pow(mag[x], p) * w[x];
  return std::pow(s, 1.0 / p);
}

inline double weighted_measure(const std::vector<std::size_t>& points, const Weight& w) {
  double s = 0;
  for (std::size_t p : points) s += w[p];
  return s;
}

inline double weighted_measure(const std::vector<char>& mask, const Weight& w) {
  double s = 0;
  for (std::size_t p = 0; p < mask.size(); ++p)
    if (mask[p]) s += w[p];
  return s;
}

/// Dyadic thresholds 2^j covering the 1st to 99th percentile of the positive
/// entries of the sample.
inline std::vector<double> dyadic_lambda_grid(std::span<const double> values) {
  std::vector<double> pos;
  for (double v : values)
    if (v > 0) pos.push_back(v);
  if (pos.empty()) return {};
  const double lo = quantile(pos, 0.01), hi = quantile(pos, 0.99);
  std::vector<double> out;
  for (int j = int(std::floor(std::log2(lo))); j <= int(std::ceil(std::log2(hi))); ++j) out.push_back(std::ldexp(1.0, j));
  return out;
}

/// sup over the dyadic lambda grid of lambda * w{|f| > lambda}^{1/p}.
inline double weak_quasinorm(const Field& f, const Weight& w, double p) {
  require(p >= 1, "weak quasinorm exponent must satisfy p >= 1");
  const Field mag = lq_magnitude(f, 2.0);
  double best = 0;
  for (double lambda : dyadic_lambda_grid(mag.values())) {
    double m = 0;
    for (std::size_t x = 0; x < mag.points(); ++x)
      if (mag[x] > lambda) m += w[x];
    best = std::max(best, lambda * std::pow(m, 1.0 / p));
  }
  return best;
}

inline double bmo_norm(const Field& f, CubeFamily family) {
  const GridSpec& g = f.grid();
  const TorusPrefix prefix(g, f.component(0));
  double sup = 0;
  for_each_cube(g, family, [&](Point c, int side) {
    const auto pts = box_points(g, c, side);
    const double mean = prefix.box_sum(c, cube_extent(g, side)) / double(pts.size());
    double osc = 0;
    for (std::size_t p : pts) osc += std::abs(f[p] - mean);
    sup = std::max(sup, osc / double(pts.size()));
  });
  return sup;
}

inline double bmo_norm(const Field& f) { return bmo_norm(f, default_cube_family(f.grid().d())); }

}  // namespace varlab
