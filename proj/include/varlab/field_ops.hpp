#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "varlab/lattice.hpp"

namespace varlab {

inline Field operator+(const Field& a, const Field& b) {
  require_same_grid(a, b);
  require(a.family_size() == b.family_size(), "family sizes differ");
  Field out = a;
  for (std::size_t i = 0; i < out.values().size(); ++i) out[i] += b[i];
  return out;
}

inline Field operator-(const Field& a, const Field& b) {
  require_same_grid(a, b);
  require(a.family_size() == b.family_size(), "family sizes differ");
  Field out = a;
  for (std::size_t i = 0; i < out.values().size(); ++i) out[i] -= b[i];
  return out;
}

inline Field operator*(double c, const Field& a) {
  Field out = a;
  for (double& v : out.values()) v *= c;
  return out;
}

/// Pointwise product of a field (any family size) with a scalar field.
inline Field multiply(const Field& a, const Field& scalar) {
  require_same_grid(a, scalar);
  Field out = a;
  for (std::size_t i = 0; i < a.family_size(); ++i) {
    auto c = out.component(i);
    for (std::size_t x = 0; x < c.size(); ++x) c[x] *= scalar[x];
  }
  return out;
}

/// Pointwise (sum_i |f_i|^q)^{1/q}.
inline Field lq_magnitude(const Field& f, double q) {
  require(q >= 1, "q must be at least 1");
  Field out(f.grid());
  const std::size_t n = f.points();
  for (std::size_t x = 0; x < n; ++x) {
    if (f.family_size() == 1) {
      out[x] = std::abs(f[x]);
      continue;
    }
    double s = 0;
    for (std::size_t i = 0; i < f.family_size(); ++i) s += std::pow(std::abs(f.component(i)[x]), q);
    out[x] = std::pow(s, 1.0 / q);
  }
  return out;
}

inline double sum(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x;
  return s;
}

inline double max_abs(std::span<const double> v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double lp_norm(std::span<const double> v, double p) {
  double s = 0;
  for (double x : v) s += std::pow(std::abs(x), p);
  return std::pow(s, 1.0 / p);
}

/// Empirical quantile (nearest rank, q in [0, 1]).
inline double quantile(std::vector<double> v, double q) {
  require(!v.empty(), "quantile of an empty sample");
  std::size_t k = std::size_t(std::floor(q * double(v.size() - 1) + 0.5));
  k = std::min(k, v.size() - 1);
  std::nth_element(v.begin(), v.begin() + std::ptrdiff_t(k), v.end());
  return v[k];
}

}  // namespace varlab
