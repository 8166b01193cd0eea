#pragma once

// Suites built on mean-zero atoms: the vector-valued Calderon-Zygmund
// pipeline for the weak (1,1) bound, the single-scale reverse Hoelder
// inequality, and the decay of short variations over fine Haar inputs.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "varlab/averages.hpp"
#include "varlab/harness/common.hpp"
#include "varlab/harness/norm_suites.hpp"
#include "varlab/martingale.hpp"
#include "varlab/weights.hpp"

namespace varlab::harness {

namespace detail {

/// Euclidean torus distance from x to the nearest point of the cube q.
inline double torus_distance(const GridSpec& g, Point x, const CubeRef& q) {
  const int L = g.side(), s = q.side();
  auto axis = [&](int xc, int qc) {
    const int u = g.wrap(xc - qc);
    return u < s ? 0.0 : double(std::min(u - (s - 1), L - u));
  };
  const double a = axis(x[0], q.corner[0]);
  const double b = g.d() == 2 ? axis(x[1], q.corner[1]) : 0.0;
  return std::sqrt(a * a + b * b);
}

}  // namespace detail

/// Normalizes each input by a multiple of the mean of F, decomposes at
/// height 1, checks the per-cube invariants, and measures
/// w{x outside the enlarged cubes : (sum_i frak_r(b_i)^q)^{1/q} > 1} / sum_Q w(Q).
inline ExperimentReport verify_weak11_vector(const RunParams& c) {
  config_require(c.q >= 1 && std::isfinite(c.q), "precondition 1 <= q < infinity violated");
  config_require(c.r > 1 && std::isfinite(c.r), "precondition 1 < r < infinity violated");
  validate_scales(c.scales, c.grid);
  const double normalizer = c.num("normalizer");
  const int enlarge = c.integer("enlarge");
  config_require(normalizer >= 1, "normalizer must be at least 1 (the decomposition needs mean F <= height)");
  config_require(enlarge >= 1 && enlarge % 2 == 1, "enlarge must be an odd positive integer");
  return run_experiment(c, [&](ExperimentReport& rep) {
    const auto ws = build_weights(c.weight, c.grid, c.p);
    const auto a1 = detail::a1_constants(ws);
    std::vector<double> a1_exhaustive;
    for (const Weight& w : ws) a1_exhaustive.push_back(a1_constant(w, CubeFamily::exhaustive));
    detail::weight_rows(rep, ws, "a1_constant", a1);
    const Ensemble ens = c.ensemble();
    const GridSpec& g = c.grid;
    const double two_d = std::ldexp(1.0, g.d());
    const double enlarge_d = std::pow(double(enlarge), g.d());
    const auto data = run_trials(rep, c.count, [&](std::size_t t) {
      TrialOutcome o;
      const Field f = make_trial(ens, t);
      const double mean_f = sum(lq_magnitude(f, c.q).values()) / double(g.size());
      if (mean_f == 0) {
        for (const Weight& w : ws) o.add(w.family, 0, 0, true);
        return o;
      }
      const CZResult cz = cz_decompose((1.0 / (normalizer * mean_f)) * f, 1.0, c.q);
      o.data["cubes"] = cz.cubes.size();

      Check& mink = o.check("per_cube_lq_minkowski", 1e-12);
      for (std::size_t k = 0; k < cz.cubes.size(); ++k) {
        const auto& atom = cz.bad_atoms[k];
        const std::size_t n = atom.size() / cz.family_size;
        double lhs = 0, mag = 0;
        for (std::size_t i = 0; i < cz.family_size; ++i) {
          double l1 = 0;
          for (std::size_t p = 0; p < n; ++p) l1 += std::abs(atom[i * n + p]);
          lhs += std::pow(l1, c.q);
        }
        for (std::size_t p = 0; p < n; ++p) {
          double s = 0;
          for (std::size_t i = 0; i < cz.family_size; ++i) s += std::pow(std::abs(atom[i * n + p]), c.q);
          mag += std::pow(s, 1.0 / c.q);
        }
        const double rhs = std::pow(mag, c.q);
        mink.record_at(lhs <= rhs * (1 + 1e-12), lhs - rhs, [&] { return where(t, "cube " + std::to_string(k)); });
      }
      const Field good = lq_magnitude(cz.good, c.q);
      Check& gb = o.check("good_part_bounded_by_2^d", 1e-12);
      for (std::size_t x = 0; x < g.size(); ++x)
        gb.record_at(good[x] <= two_d * (1 + 1e-12), good[x] - two_d,
                     [&] { return where(t, "x=" + std::to_string(x)); });

      const Field frak = lq_magnitude(frak_r(cz.bad_field(), c.r, c.scales), c.q);
      std::vector<char> exceptional(g.size(), 0);
      for (const CubeRef& q : cz.cubes)
        for (std::size_t p : concentric_cube(g, q, enlarge)) exceptional[p] = 1;
      json enlarged = json::object();
      for (std::size_t i = 0; i < ws.size(); ++i) {
        const Weight& w = ws[i];
        double worst = 0, cube_w = 0;
        Check& eb = o.check("enlarged_cube_weight_bound", 1e-12);
        for (std::size_t k = 0; k < cz.cubes.size(); ++k) {
          const auto pts = cube_points(g, cz.cubes[k]);
          double fw = 0, wq = 0;
          for (std::size_t p : pts) {
            fw += cz.magnitude[p] * w[p];
            wq += w[p];
          }
          cube_w += wq;
          const double w_big = weighted_measure(concentric_cube(g, cz.cubes[k], enlarge), w);
          const double ratio = w_big / fw;
          worst = std::max(worst, ratio);
          const double bound = enlarge_d * a1_exhaustive[i];
          eb.record_at(ratio <= bound * (1 + 1e-12), ratio - bound,
                       [&] { return where(t, w.family + " cube " + std::to_string(k)); });
        }
        enlarged[w.family] = worst;
        double outside = 0;
        for (std::size_t x = 0; x < g.size(); ++x)
          if (!exceptional[x] && frak[x] > 1) outside += w[x];
        o.add(w.family, outside, cube_w, true);
      }
      o.data["enlarged_ratio"] = enlarged;
      return o;
    });
    for (const Weight& w : ws) {
      double worst = 0;
      for (const json& d : data)
        if (d.contains("enlarged_ratio")) worst = std::max(worst, d["enlarged_ratio"][w.family].get<double>());
      rep.row(w.family).info["max_enlarged_cube_ratio"] = worst;
    }
    std::size_t cubes = 0;
    for (const json& d : data) cubes += d.value("cubes", std::size_t(0));
    rep.extra["total_cubes"] = cubes;
    rep.extra["a1_exhaustive"] = a1_exhaustive;
    detail::constant_plot(rep, ws, a1, "a1_constant");
    set_witness(rep, c);
  });
}

// ---------------------------------------------------------------------------

struct AtomSpec {
  CubeRef cube;
  double amplitude = 0;
  Field values;
};

/// `atoms` disjoint Haar-type atoms: each sits in its own level-k dyadic cell
/// on a dyadic subcube of level 1..k and is +-amplitude on a balanced split
/// of its children.
inline std::vector<AtomSpec> random_atoms(const GridSpec& g, int k, std::size_t atoms, std::mt19937_64& rng) {
  std::vector<std::size_t> cells(dyadic_cube_count(g, k));
  std::iota(cells.begin(), cells.end(), std::size_t(0));
  std::shuffle(cells.begin(), cells.end(), rng);
  std::uniform_int_distribution<int> level(1, k);
  std::normal_distribution<double> amp(0.0, 1.0);
  std::vector<AtomSpec> out;
  for (std::size_t a = 0; a < atoms; ++a) {
    const CubeRef cell = dyadic_cube_at(g, k, cells[a]);
    const int l = level(rng);
    std::uniform_int_distribution<int> off(0, (1 << (k - l)) - 1);
    CubeRef q{l, {cell.corner[0] + (off(rng) << l), 0}};
    if (g.d() == 2) q.corner[1] = cell.corner[1] + (off(rng) << l);
    const int children = 1 << g.d();
    std::vector<double> sign(std::size_t(children), 1.0);
    for (int i = children / 2; i < children; ++i) sign[std::size_t(i)] = -1.0;
    std::shuffle(sign.begin(), sign.end(), rng);
    AtomSpec s{q, amp(rng), Field(g)};
    const int h = 1 << (l - 1);
    for (std::size_t p : cube_points(g, q)) {
      const Point x = g.point(p);
      const int cx = g.wrap(x[0] - q.corner[0]) >= h;
      const int cy = g.d() == 2 ? (g.wrap(x[1] - q.corner[1]) >= h) : 0;
      s.values[p] = s.amplitude * sign[std::size_t(cx + 2 * cy)];
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// At sampled x: LHS = R_k(sum_Q b^Q)(x)^r against
/// RHS = 2^{k alpha r} sum_Q l(Q)^{-alpha r} R_k(b^Q)(x)^r, and the distance-
/// localized form with R_k(b^Q) replaced by 2^{-kd} ||b^Q||_1.
inline ExperimentReport verify_reverse_holder(const RunParams& c) {
  const GridSpec& g = c.grid;
  const int k = c.integer("k");
  const int atoms = c.integer("atoms");
  const int samples = c.integer("samples");
  const double c_dist = c.num("C_dist");
  const double tolerance = c.num("stability_tolerance");
  std::vector<double> ms = c.list("M_values");
  const double r = c.r, alpha = c.alpha;
  config_require(r > 1 && std::isfinite(r), "precondition 1 < r < infinity violated");
  const double rp = r / (r - 1);
  config_require(alpha > (g.d() - 1) / rp && alpha < g.d() / rp,
                 "precondition (d-1)/r' < alpha < d/r' violated");
  config_require(k >= 1 && k <= g.K(), "atom level k out of range");
  config_require(atoms >= 1 && std::size_t(atoms) <= dyadic_cube_count(g, k), "atoms must fit in distinct level-k cells");
  config_require(samples >= 1, "samples must be positive");
  config_require(!ms.empty(), "M_values must be nonempty");
  std::vector<ScaleSet> scale_sets;
  for (double m : ms) {
    config_require(m == std::floor(m), "M_values must be integers");
    scale_sets.push_back({k, k, int(m), c.scales.kernel});
    validate_scales(scale_sets.back(), g);
  }
  auto label = [](const ScaleSet& s) { return "M=" + std::to_string(s.M); };
  auto cor_label = [](const ScaleSet& s) { return "localized M=" + std::to_string(s.M); };
  return run_experiment(c, [&](ExperimentReport& rep) {
    for (const ScaleSet& s : scale_sets) rep.row(label(s)).info = {{"M", s.M}};
    for (const ScaleSet& s : scale_sets) rep.row(cor_label(s)).info = {{"M", s.M}};
    const double scale_k = std::ldexp(1.0, k);
    run_trials(rep, c.count, [&](std::size_t t) {
      TrialOutcome o;
      std::mt19937_64 rng(trial_seed(c.seed, t));
      const auto specs = random_atoms(g, k, std::size_t(atoms), rng);
      Field total(g);
      std::vector<TorusPrefix> prefixes;
      for (const AtomSpec& s : specs) {
        for (std::size_t p = 0; p < g.size(); ++p) total[p] += s.values[p];
        prefixes.emplace_back(g, s.values.component(0));
      }
      const TorusPrefix total_prefix(g, total.component(0));
      std::uniform_int_distribution<std::size_t> at(0, g.size() - 1);
      std::vector<Point> xs;
      for (int i = 0; i < samples; ++i) xs.push_back(g.point(at(rng)));
      Check& support = o.check("localized_support", 0);
      Check& sublinear = o.check("sublinearity", 1e-12);
      for (const ScaleSet& s : scale_sets) {
        const auto radii = s.radii();
        std::vector<KernelShape> shapes;
        for (double rad : radii) shapes.push_back(kernel_shape(g.d(), rad, s.kernel));
        const double reach = radii.back() * std::sqrt(double(g.d()));
        std::vector<double> path(radii.size());
        auto r_k = [&](const TorusPrefix& pre, Point x) {
          for (std::size_t i = 0; i < radii.size(); ++i) path[i] = ergodic_avg_at(pre, x, shapes[i], s.kernel);
          return var_inhom_value(path, r);
        };
        double best = -1, best_l = 0, best_r = 0, cbest = -1, cbest_l = 0, cbest_r = 0;
        for (const Point& x : xs) {
          const double rk_total = r_k(total_prefix, x);
          const double lhs = std::pow(rk_total, r);
          double rhs = 0, cor = 0, linear = 0;
          for (std::size_t a = 0; a < specs.size(); ++a) {
            const double dist = detail::torus_distance(g, x, specs[a].cube);
            const double len = double(specs[a].cube.side());
            if (dist <= c_dist * scale_k) {
              const double l1 = std::abs(specs[a].amplitude) * double(cube_points(g, specs[a].cube).size());
              cor += std::pow(len, -alpha * r) * std::pow(l1, r);
            }
            if (dist > reach) continue;  // the averages at x never see this atom
            const double rq = r_k(prefixes[a], x);
            linear += rq;
            rhs += std::pow(len, -alpha * r) * std::pow(rq, r);
          }
          rhs *= std::pow(scale_k, alpha * r);
          cor *= std::pow(scale_k, alpha * r - g.d() * r);
          sublinear.record_at(rk_total <= linear * (1 + 1e-12) + 1e-14, rk_total - linear,
                              [&] { return where(t, "x=(" + std::to_string(x[0]) + "," + std::to_string(x[1]) + ")"); });
          support.record_at(cor > 0 || lhs == 0, lhs,
                            [&] { return where(t, "x=(" + std::to_string(x[0]) + "," + std::to_string(x[1]) + ")"); });
          if (rhs > 0 && lhs / rhs > best) {
            best = lhs / rhs;
            best_l = lhs;
            best_r = rhs;
          }
          if (cor > 0 && lhs / cor > cbest) {
            cbest = lhs / cor;
            cbest_l = lhs;
            cbest_r = cor;
          }
        }
        o.add(label(s), best_l, best >= 0 ? best_r : 0);
        o.add(cor_label(s), cbest_l, cbest >= 0 ? cbest_r : 0);
      }
      return o;
    });
    const double first = rep.row_max(label(scale_sets.front()));
    const double last = rep.row_max(label(scale_sets.back()));
    const double drift = first > 0 ? std::abs(last / first - 1) : 0.0;
    rep.check("refinement_stability", tolerance).record(std::isfinite(last) && drift <= tolerance, drift,
                                                        label(scale_sets.front()) + " vs " + label(scale_sets.back()));
    rep.fits["refinement_drift"] = drift;
    rep.plot_x = "M";
    rep.plot_y = "max_ratio";
    for (const ScaleSet& s : scale_sets) rep.plot.emplace_back(double(s.M), rep.row_max(label(s)));
    set_witness(rep, c);
    rep.witness.erase("input");
    rep.witness["generator"] = "random_atoms";
    rep.witness["atoms"] = atoms;
    rep.witness["k"] = k;
  });
}

// ---------------------------------------------------------------------------

/// For j < 0: input_j = (Haar atoms of d_{k+j} f) * E_{k+j+1} f; ratio
/// ||S_k input_j||_{L^p(w)} / ||f||_{L^p(w)}; fits log2(max ratio) against j.
inline ExperimentReport verify_short_scale_decay(const RunParams& c) {
  require_open_exponent(c.p, "p");
  config_require(c.family_size == 1, "verify_short_scale_decay takes scalar ensembles (family_size 1)");
  const int k = c.integer("k");
  std::vector<double> js = c.list("j_values");
  config_require(!js.empty(), "j_values must be nonempty");
  std::sort(js.begin(), js.end());
  for (double j : js)
    config_require(j == std::floor(j) && j < 0 && k + j >= 0, "j_values must be negative integers with k + j >= 0");
  const ScaleSet band{k, k, c.scales.M, c.scales.kernel};
  validate_scales(band, c.grid);
  auto label = [](const std::string& w, double j) { return w + " j=" + std::to_string(int(j)); };
  return run_experiment(c, [&](ExperimentReport& rep) {
    const auto ws = build_weights(c.weight, c.grid, c.p);
    const auto ap = detail::ap_constants(ws, c.p);
    for (std::size_t i = 0; i < ws.size(); ++i)
      for (double j : js) rep.row(label(ws[i].family, j)).info = {{"ap_constant", ap[i]}, {"j", int(j)}};
    const Ensemble ens = c.ensemble();
    run_trials(rep, c.count, [&](std::size_t t) {
      TrialOutcome o;
      const Field f = make_trial(ens, t);
      const MartingaleDecomposition dec = mart_decompose(f);
      const Field mag_f = lq_magnitude(f, 2.0);
      std::vector<double> rhs;
      for (const Weight& w : ws) {
        rhs.push_back(weighted_lp_norm(mag_f, w, c.p));
        detail::flat_oracle(o, w, rhs.back(), plain_norm(mag_f, c.p), "rhs", t);
      }
      for (double j : js) {
        const HaarAtoms h = haar_atoms_from_diff(dec, k, int(j));
        const Field input = multiply(h.atoms_field(), dec.expectations[std::size_t(k + int(j) + 1)]);
        const Field s = lq_magnitude(smoothed_short_variation(short_variation(avg_stack(input, band), k), k), 2.0);
        for (std::size_t i = 0; i < ws.size(); ++i) {
          const double lhs = weighted_lp_norm(s, ws[i], c.p);
          detail::flat_oracle(o, ws[i], lhs, plain_norm(s, c.p), "lhs j=" + std::to_string(int(j)), t);
          o.add(label(ws[i].family, j), lhs, rhs[i]);
        }
      }
      return o;
    });
    Check& slope_ok = rep.check("decay_slope_positive", 0);
    Check& ends = rep.check("coarsest_offset_dominates_finest", 0);
    bool degenerate = false;
    for (const Weight& w : ws) {
      std::vector<double> x, y;
      for (double j : js) {
        const double m = rep.row_max(label(w.family, j));
        if (!(m > 0)) degenerate = true;
        x.push_back(j);
        y.push_back(m > 0 ? std::log2(m) : 0.0);
      }
      if (degenerate) break;
      const LinearFit fit = linear_fit(x, y);
      rep.fits["decay_slope " + w.family] = to_json(fit);
      slope_ok.record(fit.slope > 0, -fit.slope, w.family);
      const double near = rep.row_max(label(w.family, js.back())), far = rep.row_max(label(w.family, js.front()));
      ends.record(near >= far, far - near, w.family);
    }
    if (degenerate) {
      rep.degenerate = true;
      rep.extra["degenerate_reason"] = "zero ratio at some offset; no decay fit";
    }
    rep.plot_x = "j";
    rep.plot_y = "log2_max_ratio";
    for (double j : js) {
      const double m = rep.row_max(label(ws.front().family, j));
      rep.plot.emplace_back(j, m > 0 ? std::log2(m) : -std::numeric_limits<double>::infinity());
    }
    set_witness(rep, c);
    if (degenerate) rep.degenerate = true;
  });
}

}  // namespace varlab::harness
