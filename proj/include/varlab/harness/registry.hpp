#pragma once

// Static table of runnable experiments with their full default configs.

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "varlab/harness/atom_suites.hpp"
#include "varlab/harness/config.hpp"
#include "varlab/harness/norm_suites.hpp"
#include "varlab/harness/oscillation_suites.hpp"
#include "varlab/harness/unit_runners.hpp"

namespace varlab::harness {

struct Experiment {
  std::string name;
  std::string anchor;  // the inequality or identity under test
  std::string kind;    // verify | unit
  std::string description;
  json defaults;  // complete config; user configs overlay it
  std::function<ExperimentReport(const RunParams&)> run;

  /// Config keys the runner reads (params.* listed individually).
  std::vector<std::string> parameters() const {
    std::vector<std::string> out = {"seed", "grid", "ensemble", "output"};
    for (const char* k : {"scales", "exponents", "weight"}) out.push_back(k);
    for (auto it = defaults["params"].begin(); it != defaults["params"].end(); ++it) out.push_back("params." + it.key());
    return out;
  }
};

namespace detail {

inline json base_config(const std::string& name) {
  RunParams c;
  c.experiment = name;
  c.output_dir = "out/" + name;
  return to_json(c);
}

/// base overlaid with `over`; `params` is taken whole, other keys must exist in base.
inline json config_with(const std::string& name, json over) {
  json j = base_config(name);
  if (over.contains("params")) {
    j["params"] = over["params"];
    over.erase("params");
  }
  strict_overlay(j, over, "");
  return j;
}

inline json grid(int d, int K) { return {{"d", d}, {"K", K}}; }
inline json scales(int k_min, int k_max, int M) { return {{"k_min", k_min}, {"k_max", k_max}, {"M", M}, {"kernel", "ball"}}; }
inline json ensemble(const std::string& gen, std::size_t count, std::size_t family = 1) {
  return {{"generator", gen}, {"count", count}, {"family_size", family}};
}

inline std::vector<Experiment> build_registry() {
  std::vector<Experiment> r;
  auto add = [&](std::string name, std::string anchor, std::string kind, std::string desc, json over,
                 std::function<ExperimentReport(const RunParams&)> fn) {
    json d = config_with(name, over);
    r.push_back({std::move(name), std::move(anchor), std::move(kind), std::move(desc), std::move(d), std::move(fn)});
  };

  add("verify_square_strong", "weighted square function bound", "verify",
      "||S f||_{L^p(w)} / ||f||_{L^p(w)} over the weight sweep",
      {{"grid", grid(1, 12)}, {"scales", scales(0, 8, 8)}, {"ensemble", ensemble("gaussian-field", 32)}},
      verify_square_strong);
  add("verify_square_weak", "weighted weak (1,1) square function bound", "verify",
      "sup_lambda lambda w{S f > lambda} / ||f||_{L^1(w)} over A_1 weights",
      {{"grid", grid(1, 12)}, {"scales", scales(0, 8, 8)}, {"ensemble", ensemble("sparse-spikes", 32)}},
      verify_square_weak);
  add("verify_jump", "weighted jump inequality", "verify",
      "sup_lambda lambda ||sqrt(N_lambda(A_t f))||_{L^p(w)} / ||f||_{L^p(w)}, with the jump/variation coupling",
      {{"grid", grid(1, 10)},
       {"scales", scales(0, 6, 8)},
       {"ensemble", ensemble("gaussian-field", 16)},
       {"params", {{"r_coupling", 2.0}}}},
      verify_jump);
  add("verify_variation", "vector-valued weighted r-variation bound", "verify",
      "||l^q V^r(A_t f_i)||_{L^p(w)} / ||l^q f_i||_{L^p(w)} across r, with the r/(r-2) growth fit",
      {{"grid", grid(1, 10)},
       {"scales", scales(0, 6, 8)},
       {"ensemble", ensemble("lacunary", 16, 2)},
       {"params", {{"r_values", {2.1, 2.5, 3.0, 4.0}}}}},
      verify_variation);
  add("verify_weak11_vector", "vector-valued weak (1,1) via Calderon-Zygmund", "verify",
      "weighted measure outside the enlarged cubes where l^q frak_r(b_i) > 1, over sum w(Q)",
      {{"grid", grid(1, 10)},
       {"scales", scales(0, 6, 8)},
       {"exponents", {{"q", 2.0}, {"r", 2.5}}},
       {"ensemble", ensemble("sparse-spikes", 512, 4)},
       {"params", {{"normalizer", 2.0}, {"enlarge", 5}}}},
      verify_weak11_vector);
  add("verify_reverse_holder", "single-scale reverse Hoelder for atoms", "verify",
      "R_k(sum b^Q)^r against sum (2^k / l(Q))^{alpha r} R_k(b^Q)^r and its localized form",
      {{"grid", grid(2, 8)},
       {"exponents", {{"r", 2.0}, {"alpha", 0.75}}},
       {"ensemble", ensemble("gaussian-field", 16)},
       {"params",
        {{"k", 5}, {"atoms", 16}, {"samples", 64}, {"C_dist", 5.0}, {"stability_tolerance", 0.1}, {"M_values", {8, 16}}}}},
      verify_reverse_holder);
  add("verify_short_scale_decay", "single-scale Haar decay", "verify",
      "||S_k(Haar atoms of d_{k+j} f times E_{k+j+1} f)||_{L^p(w)} / ||f||_{L^p(w)} against j",
      {{"grid", grid(1, 12)},
       {"scales", scales(0, 8, 8)},
       {"ensemble", ensemble("gaussian-field", 16)},
       {"params", {{"k", 8}, {"j_values", {-1, -2, -3, -4, -5, -6}}}}},
      verify_short_scale_decay);
  add("verify_bmo", "L^infinity to BMO variation bound", "verify",
      "sup over test cubes of the mean oscillation of l^q V^r(A_t f_i - c_{t,i,Q}) for bounded inputs",
      {{"grid", grid(1, 10)},
       {"scales", scales(0, 6, 8)},
       {"exponents", {{"q", 3.0}, {"r", 3.0}}},
       {"ensemble", ensemble("gaussian-field", 8, 2)},
       {"params", {{"cube_levels", {2, 6}}, {"cubes_per_level", 8}, {"pairs_per_cube", 4}, {"C_smooth", 2.0}}}},
      verify_bmo);
  add("verify_good_lambda", "good-lambda inequality", "verify",
      "rho(gamma, A, lambda) = w{S f > A lambda, M#_p f <= gamma lambda} / w{S f > lambda} and its gamma exponent",
      {{"grid", grid(1, 12)},
       {"scales", scales(0, 8, 8)},
       {"weight", {{"family", "flat"}}},
       {"ensemble", ensemble("gaussian-field", 16)},
       {"params",
        {{"A_values", {1.25, 1.5, 2.0, 4.0}},
         {"gamma_values", {0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9}},
         {"lambda_quantiles", {0.1, 0.25, 0.5}},
         {"A_fit", 2.0}}}},
      verify_good_lambda);

  add("oracle_variation", "exact variation and jump counts", "unit",
      "hvar_exact and jump_count against exhaustive enumeration on short random paths",
      {{"ensemble", ensemble("gaussian-field", 1000)},
       {"params", {{"n_max", 12}, {"r_values", {1.0, 1.5, 2.0, 3.0}}, {"lambdas_per_path", 12}, {"vector_fraction", 0.25}}}},
      oracle_variation);
  add("sobolev_check", "sampled variation of smooth functions", "unit",
      "hV^r of samples against 8 ||a||_r^{1-1/r} ||a'||_r^{1/r} over an analytic catalog",
      {{"ensemble", ensemble("gaussian-field", 1)},
       {"params", {{"r_values", {1.5, 2.0, 3.0, 5.0}}, {"log2_samples", {8, 9, 10, 11, 12, 13, 14}}}}},
      sobolev_check);
  add("martingale_algebra", "dyadic martingale identities", "unit",
      "telescoping, tower, idempotence, orthogonality and the level-sign isometry on random fields",
      {{"ensemble", ensemble("gaussian-field", 200)}, {"params", {{"K_max_1d", 10}, {"K_max_2d", 8}}}},
      martingale_algebra);
  add("jump_coupling", "jump count against variation", "unit",
      "lambda N_lambda^{1/r} <= hV^r on random scalar paths",
      {{"ensemble", ensemble("gaussian-field", 1000)},
       {"params", {{"n_max", 256}, {"r_values", {1.0, 1.5, 2.0, 3.0, 4.0}}, {"lambdas_per_path", 16}}}},
      jump_coupling);
  add("cz_invariants", "Calderon-Zygmund decomposition invariants", "unit",
      "mean-zero atoms, disjoint maximal cubes, cube measure and good-part bounds, reconstruction",
      {{"grid", grid(2, 6)},
       {"exponents", {{"q", 2.0}}},
       {"ensemble", ensemble("sparse-spikes", 200, 4)},
       {"params", {{"normalizer_max", 8.0}}}},
      cz_invariants);
  add("geometry", "discrete ball boundary and smoothness constants", "unit",
      "boundary cube counts and ball symmetric differences against calibrated constants",
      {{"grid", grid(2, 8)},
       {"ensemble", ensemble("gaussian-field", 64)},
       {"params",
        {{"k_values", {3, 4, 5, 6}},
         {"i_min", -6},
         {"M_calibrate", 16},
         {"M_verify", 12},
         {"residue_grid", 32},
         {"max_displacement", 8},
         {"C_boundary", 0.0},
         {"C_smooth", 0.0}}}},
      geometry);
  return r;
}

}  // namespace detail

inline const std::vector<Experiment>& registry() {
  static const std::vector<Experiment> r = detail::build_registry();
  return r;
}

inline const Experiment& find_experiment(const std::string& name) {
  for (const Experiment& e : registry())
    if (e.name == name) return e;
  throw config_error("unknown experiment '" + name + "' (see list-experiments)");
}

inline const json& default_config(const std::string& name) { return find_experiment(name).defaults; }

/// Effective parameters of a user config (must name its experiment).
inline RunParams make_run(const json& user) {
  config_require(user.is_object() && user.contains("experiment") && user["experiment"].is_string(),
                 "config must be an object naming its experiment");
  return resolve(default_config(user["experiment"].get<std::string>()), user);
}

inline ExperimentReport run(const RunParams& c) { return find_experiment(c.experiment).run(c); }

}  // namespace varlab::harness
