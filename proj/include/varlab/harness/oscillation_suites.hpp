#pragma once

// Oscillation suites: the L^infinity -> BMO bound for the vector-valued
// variation, and the good-lambda comparison of the square function with the
// sharp maximal function.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "varlab/averages.hpp"
#include "varlab/harness/common.hpp"
#include "varlab/harness/norm_suites.hpp"
#include "varlab/variation.hpp"
#include "varlab/weights.hpp"

namespace varlab::harness {

namespace detail {

/// Lattice points seen by the kernel of radius t at y, wrapped.
inline std::vector<std::size_t> kernel_points(const GridSpec& g, Point y, double t, Kernel kernel) {
  if (kernel == Kernel::ball || g.d() == 1) {
    std::vector<std::size_t> out;
    for (Point p : ball_points(g, y, t)) out.push_back(g.index(p));
    return out;
  }
  const int h = kernel_shape(g.d(), t, kernel).reach;
  return box_points(g, {y[0] - h, y[1] - h}, 2 * h + 1);
}

inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t cap, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t(0));
  if (n > cap) {
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(cap);
    std::sort(idx.begin(), idx.end());
  }
  return idx;
}

}  // namespace detail

/// For inputs with ||(sum_i |f_i|^q)^{1/q}||_inf = 1: sup over test cubes Q of
/// the mean over x in Q of (sum_i V^r_t(A_t f_i(x) - c_{t,i,Q})^q)^{1/q},
/// c_{t,i,Q} the Q-mean of A_t b_i with b = f off the tripled cube.
inline ExperimentReport verify_bmo(const RunParams& c) {
  config_require(c.q >= 1 && std::isfinite(c.q), "precondition 1 <= q < infinity violated");
  config_require(c.r >= 1 && std::isfinite(c.r), "precondition 1 <= r < infinity violated");
  validate_scales(c.scales, c.grid);
  const GridSpec& g = c.grid;
  const auto levels = c.list("cube_levels");
  config_require(levels.size() == 2 && levels[0] <= levels[1] && levels[0] >= 0 && levels[1] <= g.K() - 2,
                 "cube_levels must be [lo, hi] with 0 <= lo <= hi <= K - 2");
  const int cap = c.integer("cubes_per_level");
  const int pairs = c.integer("pairs_per_cube");
  const double c_smooth = c.num("C_smooth");
  config_require(cap >= 1 && pairs >= 0, "cubes_per_level must be positive and pairs_per_cube non-negative");
  return run_experiment(c, [&](ExperimentReport& rep) {
    rep.row("");
    const Ensemble ens = c.ensemble();
    const auto radii = c.scales.radii();
    std::vector<KernelShape> shapes;
    for (double t : radii) shapes.push_back(kernel_shape(g.d(), t, c.scales.kernel));
    const int lo = int(levels[0]), hi = int(levels[1]);
    const auto data = run_trials(rep, c.count, [&](std::size_t t) {
      TrialOutcome o;
      Field f = make_trial(ens, t);
      const double fmax = max_abs(lq_magnitude(f, c.q).values());
      if (fmax == 0) {
        o.add("", 0, 0, true);
        return o;
      }
      f = (1.0 / fmax) * f;
      const double bound = max_abs(lq_magnitude(f, c.q).values());
      const AvgStack st = avg_stack(f, c.scales);
      const std::size_t m = f.family_size(), n = radii.size();
      std::mt19937_64 rng(trial_seed(c.seed, t) ^ 0x5bd1e995ULL);
      Check& vanish = o.check("outer_part_vanishes_below_cube_side", 0);
      Check& smooth = o.check("ball_symmetric_difference_bound", 0);
      double sup = 0;
      json per_level = json::array();
      std::vector<double> path(n), cvals(n * m);
      for (int l = lo; l <= hi; ++l) {
        double level_sup = 0;
        const double side = std::ldexp(1.0, l);
        for (std::size_t qi : detail::sample_indices(dyadic_cube_count(g, l), std::size_t(cap), rng)) {
          const CubeRef q = dyadic_cube_at(g, l, qi);
          const auto pts = cube_points(g, q);
          Field b = f;
          for (std::size_t p : concentric_3Q(g, q))
            for (std::size_t i = 0; i < m; ++i) b.component(i)[p] = 0.0;
          const auto pre = varlab::detail::prefixes_of(b);
          std::fill(cvals.begin(), cvals.end(), 0.0);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t ri = 0; ri < n; ++ri) {
              double s = 0;
              for (std::size_t p : pts) s += ergodic_avg_at(pre[i], g.point(p), shapes[ri], c.scales.kernel);
              cvals[i * n + ri] = s / double(pts.size());
            }
          double mean = 0;
          for (std::size_t p : pts) {
            double acc = 0;
            for (std::size_t i = 0; i < m; ++i) {
              st.path(p, i, 0, n - 1, path);
              for (std::size_t ri = 0; ri < n; ++ri) path[ri] -= cvals[i * n + ri];
              acc += std::pow(var_inhom_value(path, c.r), c.q);
            }
            mean += std::pow(acc, 1.0 / c.q);
          }
          mean /= double(pts.size());
          level_sup = std::max(level_sup, mean);

          const auto probe = detail::sample_indices(pts.size(), 4, rng);
          for (std::size_t ri = 0; ri < n && radii[ri] < side; ++ri)
            for (std::size_t pi : probe) {
              const Point y = g.point(pts[pi]);
              for (std::size_t i = 0; i < m; ++i) {
                double s = 0;
                for (std::size_t p : detail::kernel_points(g, y, radii[ri], c.scales.kernel)) s += b.component(i)[p];
                vanish.record_at(s == 0.0, std::abs(s), [&] {
                  return where(t, "cube level " + std::to_string(l) + " index " + std::to_string(qi) + " t=" + fmt(radii[ri]));
                });
              }
            }
          std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
          for (int k = 0; k < pairs && pts.size() > 1; ++k) {
            const Point x = g.point(pts[pick(rng)]), y = g.point(pts[pick(rng)]);
            if (x == y) continue;
            const double dist = std::hypot(double(x[0] - y[0]), double(x[1] - y[1]));
            for (double rad : radii) {
              const double cnt = double(ball_symm_diff(g.d(), x, y, rad));
              const double cap_v = c_smooth * dist * std::pow(rad, g.d() - 1);
              smooth.record_at(cnt <= cap_v, cnt / (dist * std::pow(rad, g.d() - 1)) - c_smooth,
                               [&] { return where(t, "t=" + fmt(rad) + " |x-y|=" + fmt(dist)); });
            }
          }
        }
        per_level.push_back(level_sup);
        sup = std::max(sup, level_sup);
      }
      o.data["per_level"] = per_level;
      o.add("", sup, bound);
      return o;
    });
    rep.plot_x = "cube_level";
    rep.plot_y = "max_mean_oscillation";
    for (int l = lo; l <= hi; ++l) {
      double best = 0;
      for (const json& d : data)
        if (d.contains("per_level")) best = std::max(best, d["per_level"][std::size_t(l - lo)].get<double>());
      rep.plot.emplace_back(double(l), best);
    }
    set_witness(rep, c);
  });
}

/// rho(gamma, A, lambda) = w{S f > A lambda, M#_p f <= gamma lambda} / w{S f > lambda}
/// at lambda quantiles of S f.
inline ExperimentReport verify_good_lambda(const RunParams& c) {
  config_require(c.p >= 1 && std::isfinite(c.p), "precondition 1 <= p < infinity violated");
  config_require(c.family_size == 1, "verify_good_lambda takes scalar ensembles (family_size 1)");
  validate_scales(c.scales, c.grid);
  std::vector<double> As = c.list("A_values"), gammas = c.list("gamma_values"), quants = c.list("lambda_quantiles");
  const double a_fit = c.num("A_fit");
  std::sort(As.begin(), As.end());
  std::sort(gammas.begin(), gammas.end());
  config_require(!As.empty() && As.front() > 1, "precondition A > 1 violated");
  config_require(!gammas.empty() && gammas.front() > 0, "gamma_values must be positive");
  config_require(std::find(As.begin(), As.end(), a_fit) != As.end(), "A_fit must be one of A_values");
  for (double qv : quants) config_require(qv >= 0 && qv < 1, "lambda_quantiles must lie in [0, 1)");
  return run_experiment(c, [&](ExperimentReport& rep) {
    const auto ws = build_weights(c.weight, c.grid, c.p);
    std::vector<AinftyFit> fits;
    for (const Weight& w : ws) {
      fits.push_back(ainfty_fit(w, {c.weight.seed}));
      rep.row(w.family).info = {{"ainfty_C", fits.back().C}, {"ainfty_delta", fits.back().delta}};
    }
    const Ensemble ens = c.ensemble();
    const std::size_t fit_a = std::size_t(std::find(As.begin(), As.end(), a_fit) - As.begin());
    const auto data = run_trials(rep, c.count, [&](std::size_t t) {
      TrialOutcome o;
      const Field f = make_trial(ens, t);
      const Field s = lq_magnitude(square_function(f, c.scales), 2.0);
      const Field ms = sharp_maximal(f, c.p);
      const double min_ms = *std::min_element(ms.values().begin(), ms.values().end());
      Check& mono_g = o.check("rho_nondecreasing_in_gamma", 0);
      Check& mono_a = o.check("rho_nonincreasing_in_A", 0);
      Check& cap = o.check("rho_unrestricted_at_most_one", 0);
      Check& empty = o.check("rho_zero_on_empty_set", 0);
      json fit_data = json::object();
      for (std::size_t wi = 0; wi < ws.size(); ++wi) {
        const Weight& w = ws[wi];
        const double pd = c.p * fits[wi].delta;
        double best = -1, best_l = 0, best_r = 0;
        std::vector<double> rho_sum(gammas.size(), 0.0);
        std::size_t used = 0;
        for (double qv : quants) {
          const double lambda = quantile(std::vector<double>(s.values().begin(), s.values().end()), qv);
          if (!(lambda > 0)) continue;
          double denom = 0;
          for (std::size_t x = 0; x < s.points(); ++x)
            if (s[x] > lambda) denom += w[x];
          if (denom == 0) continue;
          ++used;
          auto measure = [&](double a, double gamma_lambda, bool restricted) {
            double m = 0;
            for (std::size_t x = 0; x < s.points(); ++x)
              if (s[x] > a * lambda && (!restricted || ms[x] <= gamma_lambda)) m += w[x];
            return m / denom;
          };
          std::vector<std::vector<double>> rho(As.size(), std::vector<double>(gammas.size()));
          for (std::size_t ai = 0; ai < As.size(); ++ai) {
            for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
              rho[ai][gi] = measure(As[ai], gammas[gi] * lambda, true);
              const double shape = std::pow(gammas[gi] / (As[ai] - 1), pd);
              if (rho[ai][gi] > 0 && rho[ai][gi] / shape > best) {
                best = rho[ai][gi] / shape;
                best_l = rho[ai][gi];
                best_r = shape;
              }
            }
            const double unrestricted = measure(As[ai], 0, false);
            cap.record_at(unrestricted <= 1.0, unrestricted - 1.0, [&] { return where(t, w.family); });
            if (min_ms > 0) {
              const double e = measure(As[ai], 0.5 * min_ms, true);
              empty.record_at(e == 0.0, e, [&] { return where(t, w.family); });
            }
          }
          for (std::size_t ai = 0; ai < As.size(); ++ai)
            for (std::size_t gi = 0; gi + 1 < gammas.size(); ++gi)
              mono_g.record_at(rho[ai][gi + 1] >= rho[ai][gi], rho[ai][gi] - rho[ai][gi + 1],
                               [&] { return where(t, w.family + " A=" + fmt(As[ai]) + " gamma=" + fmt(gammas[gi + 1])); });
          for (std::size_t ai = 0; ai + 1 < As.size(); ++ai)
            for (std::size_t gi = 0; gi < gammas.size(); ++gi)
              mono_a.record_at(rho[ai + 1][gi] <= rho[ai][gi], rho[ai + 1][gi] - rho[ai][gi],
                               [&] { return where(t, w.family + " A=" + fmt(As[ai + 1]) + " gamma=" + fmt(gammas[gi])); });
          for (std::size_t gi = 0; gi < gammas.size(); ++gi) rho_sum[gi] += rho[fit_a][gi];
        }
        fit_data[w.family] = {{"rho_sum", rho_sum}, {"used", used}};
        o.add(w.family, best_l, best >= 0 ? best_r : 0.0, best < 0);
      }
      o.data = fit_data;
      return o;
    });
    for (std::size_t wi = 0; wi < ws.size(); ++wi) {
      const Weight& w = ws[wi];
      std::vector<double> mean(gammas.size(), 0.0);
      double used = 0;
      for (const json& d : data) {
        const json& e = d[w.family];
        used += e["used"].get<double>();
        for (std::size_t gi = 0; gi < gammas.size(); ++gi) mean[gi] += e["rho_sum"][gi].get<double>();
      }
      std::vector<double> x, y;
      for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
        if (used > 0) mean[gi] /= used;
        if (mean[gi] > 0) {
          x.push_back(std::log(gammas[gi]));
          y.push_back(std::log(mean[gi]));
        }
      }
      json fj = to_json(linear_fit(x, y));
      fj["p_delta"] = c.p * fits[wi].delta;
      fj["mean_rho"] = mean;
      rep.fits["gamma_exponent " + w.family] = fj;
      if (wi == 0) {
        rep.plot_x = "gamma";
        rep.plot_y = "mean_rho_at_A_fit";
        for (std::size_t gi = 0; gi < gammas.size(); ++gi) rep.plot.emplace_back(gammas[gi], mean[gi]);
      }
    }
    set_witness(rep, c);
  });
}

}  // namespace varlab::harness
