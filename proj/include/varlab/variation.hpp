#pragma once

// r-variation seminorms and jump counts of finite sampled paths.
//
// For scalar paths the homogeneous r-variation (r >= 1) is attained on a
// partition made of the path's endpoints and strict turning points: two
// increments of the same sign merge without loss because
// |x + y|^r >= |x|^r + |y|^r, and every alternating partition point can be
// slid to the extreme value of its monotone stretch. The exact O(m^2)
// dynamic program therefore runs on the m turning points only.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "varlab/error.hpp"

namespace varlab {

struct SampledPath {
  std::vector<double> times;
  std::vector<double> values;  // n * dim entries, sample-major
  std::size_t dim = 1;

  static SampledPath from_values(std::vector<double> values, std::size_t dim = 1) {
    SampledPath p;
    p.dim = dim;
    p.values = std::move(values);
    p.times.resize(p.values.size() / std::max<std::size_t>(dim, 1));
    for (std::size_t i = 0; i < p.times.size(); ++i) p.times[i] = double(i);
    return p;
  }

  std::size_t size() const { return times.size(); }
  std::span<const double> sample(std::size_t i) const { return {values.data() + i * dim, dim}; }

  void validate() const {
    require(dim >= 1, "path dimension must be positive");
    require(!times.empty(), "path must contain at least one sample");
    require(values.size() == times.size() * dim, "path values do not match its times");
    for (std::size_t i = 1; i < times.size(); ++i)
      require(times[i] > times[i - 1], "path times must be strictly increasing");
    for (double v : values) require(std::isfinite(v), "path values must be finite");
  }
};

struct VariationResult {
  double value = 0;
  std::vector<std::size_t> witness;
  double r = 1;
};

struct JumpRecord {
  double lambda = 0;
  std::size_t count = 0;
  std::vector<std::size_t> witness;
};

namespace detail {

inline double rpow(double x, double r) {
  x = std::abs(x);
  if (r == 1.0) return x;
  if (r == 2.0) return x * x;
  return std::pow(x, r);
}

inline double root(double s, double r) {
  if (r == 1.0) return s;
  if (r == 2.0) return std::sqrt(s);
  return std::pow(s, 1.0 / r);
}

/// Endpoints and strict turning points of a scalar sequence. Plateaus keep
/// their first index; monotone runs keep their last index.
inline void turning_points(std::span<const double> a, std::vector<std::size_t>& out) {
  out.clear();
  if (a.empty()) return;
  out.push_back(0);
  int dir = 0;
  for (std::size_t i = 1; i < a.size(); ++i) {
    const double diff = a[i] - a[out.back()];
    const int s = (diff > 0) - (diff < 0);
    if (s == 0) continue;
    if (s == dir) {
      out.back() = i;
    } else {
      out.push_back(i);
      dir = s;
    }
  }
}

struct VariationScratch {
  std::vector<std::size_t> candidates;
  std::vector<double> best;
  std::vector<std::ptrdiff_t> prev;
};

inline VariationScratch& scratch() {
  thread_local VariationScratch s;
  return s;
}

/// best[i] = max(0, max_{j<i} best[j] + |v_i - v_j|^r); ties keep the
/// smallest j. Returns the r-th power of the variation and the argmax.
inline double dp_power(std::span<const double> v, double r, std::vector<double>& best,
                       std::vector<std::ptrdiff_t>* prev, std::size_t& argmax) {
  const std::size_t m = v.size();
  best.assign(m, 0.0);
  if (prev) prev->assign(m, -1);
  double top = 0;
  argmax = 0;
  for (std::size_t i = 1; i < m; ++i) {
    double bi = 0;
    std::ptrdiff_t pi = -1;
    for (std::size_t j = 0; j < i; ++j) {
      const double cand = best[j] + rpow(v[i] - v[j], r);
      if (cand > bi) {
        bi = cand;
        pi = std::ptrdiff_t(j);
      }
    }
    best[i] = bi;
    if (prev) (*prev)[i] = pi;
    if (bi > top) {
      top = bi;
      argmax = i;
    }
  }
  return top;
}

}  // namespace detail

/// Homogeneous r-variation of a scalar sequence (order of samples only).
inline double hvar_value(std::span<const double> a, double r) {
  auto& s = detail::scratch();
  detail::turning_points(a, s.candidates);
  thread_local std::vector<double> compressed;
  compressed.resize(s.candidates.size());
  for (std::size_t i = 0; i < s.candidates.size(); ++i) compressed[i] = a[s.candidates[i]];
  std::size_t argmax = 0;
  return detail::root(detail::dp_power(compressed, r, s.best, nullptr, argmax), r);
}

/// Inhomogeneous r-variation: sup |a| plus the homogeneous variation.
inline double var_inhom_value(std::span<const double> a, double r) {
  double sup = 0;
  for (double v : a) sup = std::max(sup, std::abs(v));
  return sup + hvar_value(a, r);
}

inline VariationResult hvar_exact(const SampledPath& path, double r) {
  path.validate();
  require(r >= 1 && std::isfinite(r), "variation exponent must satisfy r >= 1");
  const std::size_t n = path.size();
  VariationResult res;
  res.r = r;
  if (path.dim == 1) {
    std::vector<std::size_t> cand;
    detail::turning_points(path.values, cand);
    std::vector<double> v(cand.size());
    for (std::size_t i = 0; i < cand.size(); ++i) v[i] = path.values[cand[i]];
    std::vector<double> best;
    std::vector<std::ptrdiff_t> prev;
    std::size_t argmax = 0;
    res.value = detail::root(detail::dp_power(v, r, best, &prev, argmax), r);
    for (std::ptrdiff_t i = std::ptrdiff_t(argmax); i >= 0; i = prev[std::size_t(i)])
      res.witness.push_back(cand[std::size_t(i)]);
  } else {
    std::vector<double> best(n, 0.0);
    std::vector<std::ptrdiff_t> prev(n, -1);
    double top = 0;
    std::size_t argmax = 0;
    for (std::size_t i = 1; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        double dist2 = 0;
        for (std::size_t c = 0; c < path.dim; ++c) {
          const double dlt = path.sample(i)[c] - path.sample(j)[c];
          dist2 += dlt * dlt;
        }
        const double cand = best[j] + detail::rpow(std::sqrt(dist2), r);
        if (cand > best[i]) {
          best[i] = cand;
          prev[i] = std::ptrdiff_t(j);
        }
      }
      if (best[i] > top) {
        top = best[i];
        argmax = i;
      }
    }
    res.value = detail::root(top, r);
    for (std::ptrdiff_t i = std::ptrdiff_t(argmax); i >= 0; i = prev[std::size_t(i)])
      res.witness.push_back(std::size_t(i));
  }
  std::reverse(res.witness.begin(), res.witness.end());
  return res;
}

inline double sample_norm(const SampledPath& path, std::size_t i) {
  double s = 0;
  for (double v : path.sample(i)) s += v * v;
  return std::sqrt(s);
}

inline double var_inhom(const SampledPath& path, double r) {
  const double h = hvar_exact(path, r).value;
  double sup = 0;
  for (std::size_t i = 0; i < path.size(); ++i) sup = std::max(sup, sample_norm(path, i));
  return sup + h;
}

inline constexpr std::size_t kMaxBruteforceSamples = 14;

/// Exhaustive maximum over all increasing subsequences (oracle, n <= 14).
inline double hvar_bruteforce(const SampledPath& path, double r) {
  path.validate();
  require(r >= 1, "variation exponent must satisfy r >= 1");
  const std::size_t n = path.size();
  require(n <= kMaxBruteforceSamples, "path too long for exhaustive enumeration");
  double best = 0;
  std::vector<std::size_t> idx;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    idx.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    double s = 0;
    for (std::size_t j = 1; j < idx.size(); ++j) {
      double dist2 = 0;
      for (std::size_t c = 0; c < path.dim; ++c) {
        const double dlt = path.sample(idx[j])[c] - path.sample(idx[j - 1])[c];
        dist2 += dlt * dlt;
      }
      s += std::pow(std::sqrt(dist2), r);
    }
    best = std::max(best, s);
  }
  return std::pow(best, 1.0 / r);
}

// ---------------------------------------------------------------------------
// Jump counting

namespace detail {

// Level c holds the value range of samples that end some chain of c jumps.
// The ranges are nested (dropping the first jump of a chain gives a chain
// one shorter ending at the same sample), so the longest extensible level is
// found by binary search.
struct JumpLevel {
  double lo;
  std::size_t lo_idx;
  double hi;
  std::size_t hi_idx;
};

inline std::size_t jump_scan(std::span<const double> a, double lambda, std::vector<JumpLevel>& levels,
                             std::vector<std::ptrdiff_t>* pred, std::size_t* first_top) {
  levels.clear();
  if (pred) pred->assign(a.size(), -1);
  if (a.empty()) return 0;
  levels.push_back({a[0], 0, a[0], 0});
  std::size_t top_at = 0;
  for (std::size_t i = 1; i < a.size(); ++i) {
    const double v = a[i];
    auto escapes = [&](std::size_t c) {
      return v - levels[c].lo > lambda || levels[c].hi - v > lambda;
    };
    std::size_t reach = 0;
    if (escapes(0)) {
      std::size_t lo = 0, hi = levels.size() - 1;
      while (lo < hi) {
        const std::size_t mid = (lo + hi + 1) / 2;
        if (escapes(mid)) lo = mid;
        else hi = mid - 1;
      }
      reach = lo + 1;
      if (pred) (*pred)[i] = std::ptrdiff_t(v - levels[lo].lo > lambda ? levels[lo].lo_idx : levels[lo].hi_idx);
    }
    std::size_t start = reach + 1;
    if (reach == levels.size()) {
      levels.push_back({v, i, v, i});
      top_at = i;
      start = reach;
    }
    for (std::size_t c = start; c-- > 0;) {
      JumpLevel& L = levels[c];
      if (L.lo <= v && v <= L.hi) break;
      if (v < L.lo) { L.lo = v; L.lo_idx = i; }
      if (v > L.hi) { L.hi = v; L.hi_idx = i; }
    }
  }
  if (first_top) *first_top = top_at;
  return levels.size() - 1;
}

}  // namespace detail

/// N_lambda of a scalar sequence: the largest J admitting indices
/// t_0 < ... < t_J with |a_{t_j} - a_{t_{j-1}}| > lambda.
inline std::size_t jump_count_value(std::span<const double> a, double lambda) {
  thread_local std::vector<detail::JumpLevel> levels;
  return detail::jump_scan(a, lambda, levels, nullptr, nullptr);
}

inline JumpRecord jump_count(const SampledPath& path, double lambda) {
  path.validate();
  require(lambda > 0 && std::isfinite(lambda), "jump threshold must be positive");
  JumpRecord rec;
  rec.lambda = lambda;
  if (path.dim == 1) {
    std::vector<detail::JumpLevel> levels;
    std::vector<std::ptrdiff_t> pred;
    std::size_t last = 0;
    rec.count = detail::jump_scan(path.values, lambda, levels, &pred, &last);
    if (rec.count > 0)
      for (std::ptrdiff_t i = std::ptrdiff_t(last); i >= 0; i = pred[std::size_t(i)])
        rec.witness.push_back(std::size_t(i));
  } else {
    // O(n^2) longest chain for vector-valued samples.
    const std::size_t n = path.size();
    std::vector<std::size_t> cnt(n, 0);
    std::vector<std::ptrdiff_t> pred(n, -1);
    std::size_t last = 0;
    for (std::size_t i = 1; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        double dist2 = 0;
        for (std::size_t c = 0; c < path.dim; ++c) {
          const double dlt = path.sample(i)[c] - path.sample(j)[c];
          dist2 += dlt * dlt;
        }
        if (std::sqrt(dist2) > lambda && cnt[j] + 1 > cnt[i]) {
          cnt[i] = cnt[j] + 1;
          pred[i] = std::ptrdiff_t(j);
        }
      }
      if (cnt[i] > rec.count) {
        rec.count = cnt[i];
        last = i;
      }
    }
    if (rec.count > 0)
      for (std::ptrdiff_t i = std::ptrdiff_t(last); i >= 0; i = pred[std::size_t(i)])
        rec.witness.push_back(std::size_t(i));
  }
  std::reverse(rec.witness.begin(), rec.witness.end());
  return rec;
}

/// Exhaustive jump count (oracle, n <= 14).
inline std::size_t jump_bruteforce(const SampledPath& path, double lambda) {
  path.validate();
  require(lambda > 0, "jump threshold must be positive");
  const std::size_t n = path.size();
  require(n <= kMaxBruteforceSamples, "path too long for exhaustive enumeration");
  std::size_t best = 0;
  std::vector<std::size_t> idx;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    idx.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    bool ok = true;
    for (std::size_t j = 1; j < idx.size() && ok; ++j) {
      double dist2 = 0;
      for (std::size_t c = 0; c < path.dim; ++c) {
        const double dlt = path.sample(idx[j])[c] - path.sample(idx[j - 1])[c];
        dist2 += dlt * dlt;
      }
      ok = std::sqrt(dist2) > lambda;
    }
    if (ok) best = std::max(best, idx.size() - 1);
  }
  return best;
}

/// Anchored greedy selection: start at index 0 and re-anchor at the first
/// sample leaving the closed lambda-neighbourhood of the current anchor.
/// Returns the re-anchoring indices. The count lies between N_{2 lambda} and
/// N_lambda; it is not optimal in general (e.g. 0, 0.6, -0.6 with lambda 1).
inline std::vector<std::size_t> anchored_greedy_jumps(std::span<const double> a, double lambda) {
  std::vector<std::size_t> out;
  if (a.empty()) return out;
  double anchor = a[0];
  for (std::size_t i = 1; i < a.size(); ++i) {
    if (std::abs(a[i] - anchor) > lambda) {
      out.push_back(i);
      anchor = a[i];
    }
  }
  return out;
}

}  // namespace varlab
