#pragma once

// Embedding check of the homogeneous r-variation of a C^1 function on [0, T]
// into 8 ||a||_{L^r}^{1-1/r} ||a'||_{L^r}^{1/r}, evaluated on an analytic
// catalog with composite Gauss-Legendre quadrature for the norms.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "varlab/error.hpp"
#include "varlab/variation.hpp"

namespace varlab {

struct AnalyticFunction {
  std::string name;
  double horizon = 1.0;
  std::function<double(double)> value;
  std::function<double(double)> derivative;
};

inline std::vector<AnalyticFunction> analytic_catalog() {
  using std::cos;
  using std::exp;
  using std::sin;
  constexpr double pi = std::numbers::pi;
  return {
      {"constant", 1.0, [](double) { return 1.5; }, [](double) { return 0.0; }},
      {"linear", 1.0, [](double t) { return t; }, [](double) { return 1.0; }},
      {"quadratic", 1.0, [](double t) { return t * t - t; }, [](double t) { return 2 * t - 1; }},
      {"cubic", 2.0, [](double t) { return 1 - 3 * t + t * t * t; }, [](double t) { return -3 + 3 * t * t; }},
      {"sine_1", 1.0, [=](double t) { return sin(2 * pi * t); }, [=](double t) { return 2 * pi * cos(2 * pi * t); }},
      {"sine_8", 1.0, [=](double t) { return sin(8 * pi * t); }, [=](double t) { return 8 * pi * cos(8 * pi * t); }},
      {"offset_cosine", 1.0, [=](double t) { return 0.5 + cos(3 * pi * t + 0.3); },
       [=](double t) { return -3 * pi * sin(3 * pi * t + 0.3); }},
      {"damped", 3.0, [](double t) { return exp(-2 * t) * cos(20 * t); },
       [](double t) { return exp(-2 * t) * (-2 * cos(20 * t) - 20 * sin(20 * t)); }},
      {"damped_fast", 1.0, [](double t) { return exp(-5 * t) * sin(60 * t); },
       [](double t) { return exp(-5 * t) * (-5 * sin(60 * t) + 60 * cos(60 * t)); }},
      {"chirp", 2.0, [](double t) { return sin(10 * t * t); }, [](double t) { return 20 * t * cos(10 * t * t); }},
  };
}

/// Composite 8-point Gauss-Legendre rule for the integral of g over [a, b].
inline double integrate(const std::function<double(double)>& g, double a, double b, int panels = 4096) {
  static constexpr std::array<double, 4> nodes{0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                                0.9602898564975363};
  static constexpr std::array<double, 4> weights{0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                                  0.1012285362903763};
  const double h = (b - a) / panels;
  double total = 0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    const double half = 0.5 * h;
    double s = 0;
    for (std::size_t k = 0; k < nodes.size(); ++k)
      s += weights[k] * (g(mid - half * nodes[k]) + g(mid + half * nodes[k]));
    total += s * half;
  }
  return total;
}

inline double lr_norm(const std::function<double(double)>& g, double T, double r) {
  return std::pow(integrate([&](double t) { return std::pow(std::abs(g(t)), r); }, 0.0, T), 1.0 / r);
}

struct SobolevReport {
  double lhs = 0;
  double rhs = 0;
  double ratio = 0;
  double value_norm = 0;
  double derivative_norm = 0;
};

inline SobolevReport sobolev_bound_check(const AnalyticFunction& a, double r, std::size_t n_samples) {
  require(r >= 1, "variation exponent must satisfy r >= 1");
  require(n_samples >= 2, "need at least two samples");
  require(a.horizon > 0, "horizon must be positive");
  std::vector<double> samples(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i)
    samples[i] = a.value(a.horizon * double(i) / double(n_samples - 1));
  SobolevReport rep;
  rep.lhs = hvar_value(samples, r);
  rep.value_norm = lr_norm(a.value, a.horizon, r);
  rep.derivative_norm = lr_norm(a.derivative, a.horizon, r);
  rep.rhs = 8.0 * std::pow(rep.value_norm, 1.0 - 1.0 / r) * std::pow(rep.derivative_norm, 1.0 / r);
  if (rep.lhs == 0) {
    rep.ratio = 0;
  } else {
    ensure(rep.rhs > 0, "nonzero sampled variation with vanishing norm bound for " + a.name);
    rep.ratio = rep.lhs / rep.rhs;
  }
  return rep;
}

}  // namespace varlab
