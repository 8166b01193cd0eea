#pragma once

#include <chrono>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "varlab/field_ops.hpp"
#include "varlab/harness/config.hpp"
#include "varlab/harness/ensemble.hpp"
#include "varlab/harness/report.hpp"
#include "varlab/parallel.hpp"
#include "varlab/weights.hpp"

namespace varlab::harness {

/// Inputs are persisted in the witness up to this many values.
inline constexpr std::size_t kWitnessValueLimit = 4096;

/// Runs fn(t) -> TrialOutcome for every trial in parallel and absorbs the
/// outcomes in trial order. Returns the per-trial data blocks.
template <typename Fn>
std::vector<json> run_trials(ExperimentReport& rep, std::size_t count, Fn&& fn) {
  std::vector<TrialOutcome> out(count);
  parallel_for(count, [&](std::size_t t) { out[t] = fn(t); });
  std::vector<json> data;
  data.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    rep.absorb(t, out[t]);
    data.push_back(std::move(out[t].data));
  }
  return data;
}

inline std::string where(std::size_t trial, const std::string& detail = {}) {
  std::ostringstream os;
  os << "trial " << trial;
  if (!detail.empty()) os << ", " << detail;
  return os.str();
}

/// Sets the witness to the argmax trial: its regeneration recipe, the
/// ratio data, and the input values when small enough.
inline void set_witness(ExperimentReport& rep, const RunParams& c) {
  rep.finalize();
  if (rep.trials.empty()) {
    rep.witness = json::object();
    return;
  }
  const TrialRow& t = rep.trials[rep.argmax];
  const Ensemble e = c.ensemble();
  rep.witness = {{"trial_id", rep.argmax},
                 {"trial", t.trial},
                 {"group", t.group},
                 {"lhs", t.lhs},
                 {"rhs", t.rhs},
                 {"ratio", t.ratio},
                 {"seed", e.seed},
                 {"trial_seed", trial_seed(e.seed, t.trial)},
                 {"generator", e.generator},
                 {"grid", {{"d", e.grid.d()}, {"K", e.grid.K()}}},
                 {"family_size", e.family_size}};
  if (e.grid.size() * e.family_size <= kWitnessValueLimit) {
    const Field f = make_trial(e, t.trial);
    rep.witness["input"] = std::vector<double>(f.values().begin(), f.values().end());
  }
}

/// Runs body(report) with the parameters recorded and the runtime measured;
/// library precondition failures surface as config errors.
template <typename Body>
ExperimentReport run_experiment(const RunParams& c, Body&& body) {
  ExperimentReport rep;
  rep.name = c.experiment;
  rep.parameters = to_json(c);
  const auto t0 = std::chrono::steady_clock::now();
  body(rep);
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

inline void validate_scales(const ScaleSet& s, const GridSpec& g) {
  try {
    s.validate(g);
  } catch (const precondition_error& e) {
    throw config_error(std::string("scales: ") + e.what());
  }
}

inline void require_open_exponent(double p, const char* name) {
  config_require(p > 1 && std::isfinite(p), std::string("precondition 1 < ") + name + " < infinity violated");
}

/// Unweighted (sum |v|^p)^{1/p}, the oracle for the flat-weight row.
inline double plain_norm(const Field& mag, double p) { return lp_norm(mag.values(), p); }

inline bool close_rel(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)); }

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace varlab::harness
