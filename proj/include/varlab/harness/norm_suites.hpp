#pragma once

// Ratio suites for the square function, the jump counting function and the
// vector-valued r-variation, each evaluated across a weight sweep.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "varlab/averages.hpp"
#include "varlab/harness/common.hpp"
#include "varlab/variation.hpp"
#include "varlab/weights.hpp"

namespace varlab::harness {

namespace detail {

/// Pre-creates one report row per weight with its constant recorded.
inline void weight_rows(ExperimentReport& rep, const std::vector<Weight>& ws, const char* constant_name,
                        const std::vector<double>& constants) {
  for (std::size_t i = 0; i < ws.size(); ++i) rep.row(ws[i].family).info = {{constant_name, constants[i]}};
}

/// Headline curve: weight constant against the row's max ratio.
inline void constant_plot(ExperimentReport& rep, const std::vector<Weight>& ws, const std::vector<double>& constants,
                          const char* x_name) {
  rep.plot_x = x_name;
  rep.plot_y = "max_ratio";
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    const double m = rep.row_max(ws[i].family);
    rep.plot.emplace_back(constants[i], m);
    if (constants[i] > 0 && m > 0) {
      lx.push_back(std::log(constants[i]));
      ly.push_back(std::log(m));
    }
  }
  rep.fits["max_ratio_vs_weight_constant_loglog"] = to_json(linear_fit(lx, ly));
}

inline std::vector<double> ap_constants(const std::vector<Weight>& ws, double p) {
  std::vector<double> out;
  for (const Weight& w : ws) {
    out.push_back(ap_constant(w, p));
    require_finite_constant(out.back(), "A_p constant", w);
  }
  return out;
}

inline std::vector<double> a1_constants(const std::vector<Weight>& ws) {
  std::vector<double> out;
  for (const Weight& w : ws) {
    out.push_back(a1_constant(w));
    require_finite_constant(out.back(), "A_1 constant", w);
  }
  return out;
}

inline void flat_oracle(TrialOutcome& o, const Weight& w, double weighted, double plain, const std::string& what,
                        std::size_t t) {
  if (w.family != "flat") return;
  o.check("flat_weight_matches_unweighted", 1e-10)
      .record(close_rel(weighted, plain, 1e-10), std::abs(weighted - plain) / std::max(plain, 1e-300), where(t, what));
}

}  // namespace detail

/// ||S f||_{L^p(w)} / ||f||_{L^p(w)} with S the smoothed short-variation
/// square function.
inline ExperimentReport verify_square_strong(const RunParams& c) {
  require_open_exponent(c.p, "p");
  config_require(c.family_size == 1, "the square function suites take scalar ensembles (family_size 1)");
  validate_scales(c.scales, c.grid);
  return run_experiment(c, [&](ExperimentReport& rep) {
    const auto ws = build_weights(c.weight, c.grid, c.p);
    const auto ap = detail::ap_constants(ws, c.p);
    detail::weight_rows(rep, ws, "ap_constant", ap);
    const Ensemble ens = c.ensemble();
    run_trials(rep, c.count, [&](std::size_t t) {
      TrialOutcome o;
      const Field f = make_trial(ens, t);
      const Field mag_f = lq_magnitude(f, 2.0);
      const Field mag_s = lq_magnitude(square_function(f, c.scales), 2.0);
      for (const Weight& w : ws) {
        const double lhs = weighted_lp_norm(mag_s, w, c.p), rhs = weighted_lp_norm(mag_f, w, c.p);
        detail::flat_oracle(o, w, lhs, plain_norm(mag_s, c.p), "lhs", t);
        detail::flat_oracle(o, w, rhs, plain_norm(mag_f, c.p), "rhs", t);
        o.add(w.family, lhs, rhs);
      }
      return o;
    });
    detail::constant_plot(rep, ws, ap, "ap_constant");
    set_witness(rep, c);
  });
}

/// sup_lambda lambda w{S f > lambda} / ||f||_{L^1(w)} over a dyadic lambda grid.
inline ExperimentReport verify_square_weak(const RunParams& c) {
  config_require(c.family_size == 1, "the square function suites take scalar ensembles (family_size 1)");
  validate_scales(c.scales, c.grid);
  return run_experiment(c, [&](ExperimentReport& rep) {
    const auto ws = build_weights(c.weight, c.grid, 1.0);
    const auto a1 = detail::a1_constants(ws);
    detail::weight_rows(rep, ws, "a1_constant", a1);
    const Ensemble ens = c.ensemble();
    run_trials(rep, c.count, [&](std::size_t t) {
      TrialOutcome o;
      const Field f = make_trial(ens, t);
      const Field mag_s = lq_magnitude(square_function(f, c.scales), 2.0);
      const Field mag_f = lq_magnitude(f, 2.0);
      double plain_lhs = 0;
      for (double lambda : dyadic_lambda_grid(mag_s.values())) {
        std::size_t n = 0;
        for (double v : mag_s.values()) n += v > lambda;
        plain_lhs = std::max(plain_lhs, lambda * double(n));
      }
      for (const Weight& w : ws) {
        const double lhs = weak_quasinorm(mag_s, w, 1.0), rhs = weighted_lp_norm(mag_f, w, 1.0);
        detail::flat_oracle(o, w, lhs, plain_lhs, "lhs", t);
        detail::flat_oracle(o, w, rhs, plain_norm(mag_f, 1.0), "rhs", t);
        o.add(w.family, lhs, rhs);
      }
      return o;
    });
    detail::constant_plot(rep, ws, a1, "a1_constant");
    set_witness(rep, c);
  });
}

/// sup_lambda lambda ||sqrt(N_lambda(A_t f))||_{L^p(w)} / ||f||_{L^p(w)}, with
/// the pointwise coupling lambda N_lambda^{1/r} <= hV^r(A_t f(x)) checked.
inline ExperimentReport verify_jump(const RunParams& c) {
  require_open_exponent(c.p, "p");
  validate_scales(c.scales, c.grid);
  const double r = c.num("r_coupling");
  config_require(r >= 1 && std::isfinite(r), "coupling exponent r_coupling must satisfy r >= 1");
  config_require(c.family_size == 1, "verify_jump takes scalar ensembles (family_size 1)");
  return run_experiment(c, [&](ExperimentReport& rep) {
    const auto ws = build_weights(c.weight, c.grid, c.p);
    const auto ap = detail::ap_constants(ws, c.p);
    detail::weight_rows(rep, ws, "ap_constant", ap);
    const Ensemble ens = c.ensemble();
    run_trials(rep, c.count, [&](std::size_t t) {
      TrialOutcome o;
      const Field f = make_trial(ens, t);
      const AvgStack st = avg_stack(f, c.scales);
      const GridSpec& g = f.grid();
      const std::size_t n = st.size();
      std::vector<double> paths(g.size() * n), osc(g.size()), hv(g.size());
      std::vector<double> path;
      for (std::size_t x = 0; x < g.size(); ++x) {
        st.path(x, 0, 0, n - 1, path);
        std::copy(path.begin(), path.end(), paths.begin() + std::ptrdiff_t(x * n));
        osc[x] = *std::max_element(path.begin(), path.end()) - *std::min_element(path.begin(), path.end());
        hv[x] = hvar_value(path, r);
      }
      const auto lambdas = dyadic_lambda_grid(osc);
      std::vector<double> best(ws.size(), 0.0), plain_best(1, 0.0);
      Field root_n(g);
      Check& coupling = o.check("jump_variation_coupling", 1e-12);
      for (double lambda : lambdas) {
        for (std::size_t x = 0; x < g.size(); ++x) {
          const std::span<const double> px(paths.data() + x * n, n);
          const std::size_t cnt = jump_count_value(px, lambda);
          root_n[x] = std::sqrt(double(cnt));
          const double lhs = lambda * std::pow(double(cnt), 1.0 / r);
          coupling.record_at(lhs <= hv[x] * (1 + 1e-12), lhs - hv[x],
                             [&] { return where(t, "x=" + std::to_string(x) + " lambda=" + fmt(lambda)); });
        }
        for (std::size_t i = 0; i < ws.size(); ++i)
          best[i] = std::max(best[i], lambda * weighted_lp_norm(root_n, ws[i], c.p));
        plain_best[0] = std::max(plain_best[0], lambda * plain_norm(root_n, c.p));
      }
      const Field mag_f = lq_magnitude(f, 2.0);
      for (std::size_t i = 0; i < ws.size(); ++i) {
        const double rhs = weighted_lp_norm(mag_f, ws[i], c.p);
        detail::flat_oracle(o, ws[i], best[i], plain_best[0], "lhs", t);
        o.add(ws[i].family, best[i], rhs);
      }
      return o;
    });
    detail::constant_plot(rep, ws, ap, "ap_constant");
    set_witness(rep, c);
  });
}

namespace detail {

inline std::string r_label(const std::string& weight, double r) { return weight + " r=" + fmt(r); }

}  // namespace detail

/// ||(sum_i V^r(A_t f_i)^q)^{1/q}||_{L^p(w)} / ||(sum_i |f_i|^q)^{1/q}||_{L^p(w)}
/// for each r of the sweep.
inline ExperimentReport verify_variation(const RunParams& c) {
  require_open_exponent(c.p, "p");
  require_open_exponent(c.q, "q");
  validate_scales(c.scales, c.grid);
  std::vector<double> rs = c.list("r_values");
  config_require(!rs.empty(), "r_values must be nonempty");
  for (double r : rs) config_require(r > 2 && std::isfinite(r), "precondition r > 2 violated in r_values");
  std::sort(rs.begin(), rs.end());
  return run_experiment(c, [&](ExperimentReport& rep) {
    const auto ws = build_weights(c.weight, c.grid, c.p);
    const auto ap = detail::ap_constants(ws, c.p);
    for (std::size_t i = 0; i < ws.size(); ++i)
      for (double r : rs) rep.row(detail::r_label(ws[i].family, r)).info = {{"ap_constant", ap[i]}, {"r", r}};
    const Ensemble ens = c.ensemble();
    run_trials(rep, c.count, [&](std::size_t t) {
      TrialOutcome o;
      const Field f = make_trial(ens, t);
      const AvgStack st = avg_stack(f, c.scales);
      const GridSpec& g = f.grid();
      const std::size_t m = f.family_size(), n = st.size();
      std::vector<Field> num;
      std::vector<double> path;
      for (double r : rs) {
        Field acc(g);
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t x = 0; x < g.size(); ++x) {
            st.path(x, i, 0, n - 1, path);
            acc[x] += std::pow(var_inhom_value(path, r), c.q);
          }
        for (double& v : acc.values()) v = std::pow(v, 1.0 / c.q);
        num.push_back(std::move(acc));
      }
      Check& mono = o.check("pointwise_monotone_in_r", 1e-12);
      for (std::size_t a = 0; a + 1 < rs.size(); ++a)
        for (std::size_t x = 0; x < g.size(); ++x)
          mono.record_at(num[a + 1][x] <= num[a][x] * (1 + 1e-12), num[a + 1][x] - num[a][x],
                         [&] { return where(t, "x=" + std::to_string(x) + " r=" + fmt(rs[a + 1])); });
      const Field mag_f = lq_magnitude(f, c.q);
      for (const Weight& w : ws) {
        const double rhs = weighted_lp_norm(mag_f, w, c.p);
        detail::flat_oracle(o, w, rhs, plain_norm(mag_f, c.p), "rhs", t);
        for (std::size_t a = 0; a < rs.size(); ++a) {
          const double lhs = weighted_lp_norm(num[a], w, c.p);
          detail::flat_oracle(o, w, lhs, plain_norm(num[a], c.p), "lhs r=" + fmt(rs[a]), t);
          o.add(detail::r_label(w.family, rs[a]), lhs, rhs);
        }
      }
      return o;
    });
    Check& order = rep.check("max_ratio_monotone_in_r", 1e-12);
    for (const Weight& w : ws) {
      const double lo = rep.row_max(detail::r_label(w.family, rs.front()));
      const double hi = rep.row_max(detail::r_label(w.family, rs.back()));
      order.record(lo >= hi * (1 - 1e-12), hi - lo, w.family);
      std::vector<double> x, y;
      for (double r : rs) {
        const double mr = rep.row_max(detail::r_label(w.family, r));
        if (mr > 0) {
          x.push_back(std::log(r / (r - 2)));
          y.push_back(std::log(mr));
        }
      }
      rep.fits["growth_vs_r_over_r_minus_2 " + w.family] = to_json(linear_fit(x, y));
    }
    rep.plot_x = "r";
    rep.plot_y = "max_ratio";
    for (double r : rs) rep.plot.emplace_back(r, rep.row_max(detail::r_label(ws.front().family, r)));
    set_witness(rep, c);
  });
}

}  // namespace varlab::harness
