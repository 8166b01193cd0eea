#include <cmath>
#include <cstdlib>

#include <gtest/gtest.h>

#include "support.hpp"
#include "varlab/harness/registry.hpp"

namespace varlab::harness {
namespace {

using varlab::testing::Gen;

/// Shrunk configs that keep every runner's structure but finish quickly.
json small_config(const std::string& name) {
  const json g19 = {{"d", 1}, {"K", 9}};
  const json s05 = {{"k_min", 0}, {"k_max", 5}, {"M", 8}};
  json j = {{"experiment", name}, {"seed", 5}};
  if (name == "verify_square_strong" || name == "verify_square_weak" || name == "verify_jump") {
    j["grid"] = g19;
    j["scales"] = s05;
    j["ensemble"] = {{"count", 4}};
  } else if (name == "verify_variation") {
    j["grid"] = g19;
    j["scales"] = s05;
    j["ensemble"] = {{"count", 3}};
  } else if (name == "verify_weak11_vector") {
    j["grid"] = {{"d", 1}, {"K", 8}};
    j["scales"] = {{"k_min", 0}, {"k_max", 4}};
    j["ensemble"] = {{"count", 12}};
  } else if (name == "verify_reverse_holder") {
    j["grid"] = {{"d", 2}, {"K", 6}};
    j["ensemble"] = {{"count", 3}};
    j["params"] = {{"k", 3}, {"atoms", 4}, {"samples", 16}};
  } else if (name == "verify_short_scale_decay") {
    j["grid"] = {{"d", 1}, {"K", 10}};
    j["scales"] = {{"k_min", 0}, {"k_max", 6}};
    j["ensemble"] = {{"count", 4}};
    j["params"] = {{"k", 6}, {"j_values", {-1, -2, -3, -4}}};
  } else if (name == "verify_bmo") {
    j["grid"] = {{"d", 1}, {"K", 8}};
    j["scales"] = {{"k_min", 0}, {"k_max", 4}};
    j["ensemble"] = {{"count", 2}};
    j["params"] = {{"cube_levels", {2, 4}}, {"cubes_per_level", 4}};
  } else if (name == "verify_good_lambda") {
    j["grid"] = {{"d", 1}, {"K", 10}};
    j["scales"] = {{"k_min", 0}, {"k_max", 6}};
    j["ensemble"] = {{"count", 4}};
  } else if (name == "oracle_variation" || name == "jump_coupling") {
    j["ensemble"] = {{"count", 60}};
  } else if (name == "sobolev_check") {
    j["params"] = {{"log2_samples", {8, 10}}};
  } else if (name == "martingale_algebra") {
    j["ensemble"] = {{"count", 20}};
    j["params"] = {{"K_max_1d", 8}, {"K_max_2d", 5}};
  } else if (name == "cz_invariants") {
    j["ensemble"] = {{"count", 20}};
  } else if (name == "geometry") {
    j["grid"] = {{"d", 2}, {"K", 7}};
    j["ensemble"] = {{"count", 8}};
    j["params"] = {{"k_values", {3, 4}}, {"i_min", -4}, {"M_calibrate", 4}, {"M_verify", 4}, {"residue_grid", 4}};
  }
  return j;
}

bool same_trials(const ExperimentReport& a, const ExperimentReport& b) {
  if (a.trials.size() != b.trials.size()) return false;
  for (std::size_t i = 0; i < a.trials.size(); ++i) {
    const TrialRow &x = a.trials[i], &y = b.trials[i];
    if (x.trial != y.trial || x.group != y.group || x.lhs != y.lhs || x.rhs != y.rhs || x.ratio != y.ratio) return false;
  }
  return true;
}

TEST(Seeds, SplitmixReferenceValue) {
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(splitmix64(0x9e3779b97f4a7c15ULL), 0x6e789e6aa1b965f4ULL);
}

TEST(Seeds, TrialStreamsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s : {1ULL, 2ULL, 20261016ULL})
    for (std::uint64_t t = 0; t < 1000; ++t) seen.insert(trial_seed(s, t));
  EXPECT_EQ(seen.size(), 3000u);
}

TEST(Ensemble, SameSeedGivesIdenticalFields) {
  for (const std::string& gen : generator_names()) {
    const Ensemble e{9, 5, gen, GridSpec(2, 5), 2};
    const auto a = make_ensemble(e), b = make_ensemble(e);
    ASSERT_EQ(a.size(), 5u);
    for (std::size_t t = 0; t < a.size(); ++t) {
      EXPECT_TRUE(std::equal(a[t].values().begin(), a[t].values().end(), b[t].values().begin())) << gen;
      EXPECT_EQ(a[t].family_size(), 2u);
      EXPECT_GT(max_abs(a[t].values()), 0) << gen;
    }
    const auto c = make_ensemble({10, 5, gen, GridSpec(2, 5), 2});
    EXPECT_FALSE(std::equal(a[0].values().begin(), a[0].values().end(), c[0].values().begin())) << gen;
  }
}

TEST(Ensemble, TrialIsIndependentOfCount) {
  const Ensemble small{3, 2, "haar-noise", GridSpec(1, 8), 1}, large{3, 40, "haar-noise", GridSpec(1, 8), 1};
  const Field a = make_trial(small, 1), b = make_ensemble(large)[1];
  EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
}

TEST(Ensemble, GaussianMeanWithinFiveSigma) {
  const auto fields = make_ensemble({4, 8, "gaussian-field", GridSpec(1, 12), 1});
  double s = 0, n = 0;
  for (const Field& f : fields)
    for (double v : f.values()) {
      s += v;
      ++n;
    }
  EXPECT_LT(std::abs(s / n), 5 / std::sqrt(n));
}

TEST(Ensemble, RejectsUnknownGenerator) {
  EXPECT_THROW(make_trial({1, 1, "white-noise", GridSpec(1, 5), 1}, 0), precondition_error);
}

TEST(Config, EveryDefaultResolves) {
  for (const Experiment& e : registry()) {
    const RunParams c = make_run({{"experiment", e.name}});
    EXPECT_EQ(c.experiment, e.name);
    EXPECT_EQ(to_json(c), e.defaults) << e.name;
    EXPECT_EQ(to_json(from_json(to_json(c))), to_json(c)) << e.name;
  }
}

TEST(Config, UnknownKeysRejected) {
  EXPECT_THROW(make_run({{"experiment", "verify_jump"}, {"sede", 3}}), config_error);
  EXPECT_THROW(make_run({{"experiment", "verify_jump"}, {"grid", {{"D", 1}}}}), config_error);
  EXPECT_THROW(make_run({{"experiment", "verify_jump"}, {"params", {{"r_couple", 2}}}}), config_error);
  EXPECT_THROW(make_run({{"experiment", "verify_nothing"}}), config_error);
  EXPECT_THROW(make_run({{"seed", 1}}), config_error);
}

TEST(Config, WrongTypesAndBadGridsRejected) {
  EXPECT_THROW(make_run({{"experiment", "verify_jump"}, {"grid", {{"d", "one"}}}}), config_error);
  EXPECT_THROW(make_run({{"experiment", "verify_jump"}, {"grid", {{"d", 3}}}}), config_error);
  EXPECT_THROW(make_run({{"experiment", "verify_jump"}, {"ensemble", {{"generator", "noise"}}}}), config_error);
  EXPECT_THROW(make_run({{"experiment", "verify_jump"}, {"scales", {{"kernel", "disc"}}}}), config_error);
}

TEST(Config, ExponentPreconditionsSurfaceBeforeCompute) {
  RunParams c = make_run({{"experiment", "verify_square_strong"}, {"exponents", {{"p", 1.0}}}});
  try {
    run(c);
    FAIL() << "p = 1 accepted";
  } catch (const precondition_error& e) {
    EXPECT_NE(std::string(e.what()).find("1 < p"), std::string::npos) << e.what();
  }
  c = make_run({{"experiment", "verify_variation"}, {"exponents", {{"r", 2.5}}}, {"params", {{"r_values", {1.5}}}}});
  EXPECT_THROW(run(c), precondition_error);
  c = make_run({{"experiment", "verify_jump"}, {"scales", {{"k_max", 9}}}});
  EXPECT_THROW(run(c), precondition_error);
}

TEST(Config, WeightSweepFamilies) {
  WeightSpec spec;
  const auto ws = build_weights(spec, GridSpec(2, 4), 3.0);
  ASSERT_EQ(ws.size(), 5u);
  EXPECT_EQ(ws[0].family, "flat");
  EXPECT_EQ(ws[1].family, "power(0.2)");
  EXPECT_EQ(ws[2].family, "power(1.8)");
  EXPECT_EQ(ws[3].family, "two-value");
  spec.family = "triangle";
  EXPECT_THROW(build_weights(spec, GridSpec(1, 4), 2.0), config_error);
}

TEST(Registry, NamesDistinctAndComplete) {
  std::set<std::string> names;
  std::size_t verify = 0, unit = 0;
  for (const Experiment& e : registry()) {
    names.insert(e.name);
    verify += e.kind == "verify";
    unit += e.kind == "unit";
    EXPECT_FALSE(e.anchor.empty());
    EXPECT_EQ(e.defaults["output"]["dir"], "out/" + e.name);
  }
  EXPECT_EQ(names.size(), registry().size());
  EXPECT_EQ(verify, 9u);
  EXPECT_EQ(unit, 6u);
  EXPECT_EQ(verify + unit, registry().size());
}

TEST(LinearFit, RecoversExactLine) {
  const LinearFit f = linear_fit({0, 1, 2, 3}, {1, 3, 5, 7});
  EXPECT_NEAR(f.slope, 2, 1e-12);
  EXPECT_NEAR(f.intercept, 1, 1e-12);
  EXPECT_NEAR(f.r2, 1, 1e-12);
}

class SmallRun : public ::testing::TestWithParam<std::string> {};

TEST_P(SmallRun, PassesChecksAndReproduces) {
  const RunParams c = make_run(small_config(GetParam()));
  const ExperimentReport a = run(c);
  for (const Check& chk : a.checks) EXPECT_TRUE(chk.passed()) << chk.name << " worst " << chk.worst << " at " << chk.witness;
  EXPECT_FALSE(a.trials.empty());
  double mx = 0;
  for (const TrialRow& t : a.trials) {
    EXPECT_TRUE(std::isfinite(t.lhs) && std::isfinite(t.rhs) && std::isfinite(t.ratio));
    mx = std::max(mx, t.ratio);
  }
  EXPECT_EQ(a.max_ratio, mx);
  EXPECT_EQ(a.parameters, to_json(c));

  const ExperimentReport b = run(c);
  EXPECT_TRUE(same_trials(a, b));
  setenv("VARLAB_THREADS", "1", 1);
  const ExperimentReport serial = run(c);
  unsetenv("VARLAB_THREADS");
  EXPECT_TRUE(same_trials(a, serial));
}

std::vector<std::string> experiment_names() {
  std::vector<std::string> out;
  for (const Experiment& e : registry()) out.push_back(e.name);
  return out;
}

INSTANTIATE_TEST_SUITE_P(Registry, SmallRun, ::testing::ValuesIn(experiment_names()),
                         [](const ::testing::TestParamInfo<std::string>& info) { return info.param; });

TEST(Witness, RegeneratesTheArgmaxRatio) {
  json j = small_config("verify_square_strong");
  j["weight"] = {{"family", "power"}, {"alpha", 0.3}};
  const RunParams c = make_run(j);
  const ExperimentReport rep = run(c);
  const json& w = rep.witness;
  ASSERT_TRUE(w.contains("trial_seed"));
  EXPECT_EQ(w["trial_seed"].get<std::uint64_t>(), trial_seed(c.seed, w["trial"].get<std::size_t>()));
  const Field f = make_trial(c.ensemble(), w["trial"].get<std::size_t>());
  std::vector<double> persisted = w["input"];
  EXPECT_TRUE(std::equal(persisted.begin(), persisted.end(), f.values().begin()));
  const Weight wt = power_weight(c.grid, 0.3);
  const double ratio = weighted_lp_norm(square_function(f, c.scales), wt, c.p) / weighted_lp_norm(f, wt, c.p);
  EXPECT_NEAR(ratio, rep.max_ratio, 1e-12 * ratio);
}

TEST(Homogeneity, RatioPairsInvariantUnderDoubling) {
  Gen gen(81);
  const GridSpec g(1, 9);
  const ScaleSet sc{0, 5, 8, Kernel::ball};
  const Weight w = power_weight(g, 0.3);
  const Field f = gen.field(g), f2 = 2.0 * f;
  const auto strong = [&](const Field& h) {
    return weighted_lp_norm(square_function(h, sc), w, 2.0) / weighted_lp_norm(h, w, 2.0);
  };
  const auto weak = [&](const Field& h) {
    return weak_quasinorm(square_function(h, sc), w, 1.0) / weighted_lp_norm(h, w, 1.0);
  };
  const auto variation = [&](const Field& h) {
    return weighted_lp_norm(frak_r(h, 2.5, sc), w, 2.0) / weighted_lp_norm(h, w, 2.0);
  };
  EXPECT_NEAR(strong(f2), strong(f), 1e-12 * strong(f));
  EXPECT_NEAR(weak(f2), weak(f), 1e-12 * weak(f));
  EXPECT_NEAR(variation(f2), variation(f), 1e-12 * variation(f));
}

TEST(SquareStrong, ConstantInputHasZeroRatio) {
  const GridSpec g(1, 9);
  const Field c(g, 1, 3.0);
  const ScaleSet sc{0, 5, 8, Kernel::ball};
  EXPECT_LT(weighted_lp_norm(square_function(c, sc), flat_weight(g), 2.0), 1e-10);
}

}  // namespace
}  // namespace varlab::harness
