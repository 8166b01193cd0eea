#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "varlab/error.hpp"

namespace varlab::harness {

using json = nlohmann::json;

/// trial: ensemble index; the row's trial_id in the outputs is its position.
struct TrialRow {
  std::size_t trial = 0;
  std::string group;  // sweep row label, empty for single-row experiments
  double lhs = 0;
  double rhs = 0;
  double ratio = 0;
};

/// A named invariant evaluated many times; passes iff no evaluation violated it.
struct Check {
  std::string name;
  double tolerance = 0;
  std::size_t evaluated = 0;
  std::size_t violations = 0;
  double worst = 0;  // largest observed excess (check-specific units)
  std::string witness;  // location of the worst violation

  bool passed() const { return violations == 0; }

  void record(bool ok, double excess = 0, const std::string& where = {}) {
    ++evaluated;
    if (!ok && (violations == 0 || excess >= worst_violation)) {
      witness = where;
      worst_violation = excess;
    }
    if (!ok) ++violations;
    worst = std::max(worst, excess);
  }

  /// As record, with the location formatted only on violation.
  template <typename Where>
  void record_at(bool ok, double excess, Where&& where_fn) {
    record(ok, excess, ok ? std::string() : std::string(where_fn()));
  }

  void merge(const Check& o) {
    if (o.violations > 0 && (violations == 0 || o.worst_violation > worst_violation)) {
      witness = o.witness;
      worst_violation = o.worst_violation;
    }
    evaluated += o.evaluated;
    violations += o.violations;
    worst = std::max(worst, o.worst);
  }

 private:
  double worst_violation = 0;
};

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  std::size_t points = 0;
};

/// Ordinary least squares y = slope * x + intercept.
inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), "fit needs paired samples");
  LinearFit f;
  f.points = x.size();
  if (x.size() < 2) return f;
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

inline json to_json(const LinearFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}, {"points", f.points}};
}

inline Check& find_or_add(std::deque<Check>& checks, const std::string& name, double tolerance) {
  for (Check& c : checks)
    if (c.name == name) return c;
  Check c;
  c.name = name;
  c.tolerance = tolerance;
  checks.push_back(c);
  return checks.back();
}

/// Everything one trial contributes; merged into the report in trial order.
struct TrialOutcome {
  struct Row {
    std::string group;
    double lhs = 0;
    double rhs = 0;
    bool zero_ok = false;  // rhs == 0 with lhs == 0 records ratio 0 instead of skipping
  };
  std::vector<Row> rows;
  std::deque<Check> checks;
  json data = json::object();

  void add(const std::string& group, double lhs, double rhs, bool zero_ok = false) {
    rows.push_back({group, lhs, rhs, zero_ok});
  }
  Check& check(const std::string& name, double tolerance = 0) { return find_or_add(checks, name, tolerance); }
};

/// One row of a weight (or parameter) sweep.
struct SweepRow {
  std::string label;
  json info = json::object();
  double max_ratio = 0;
  std::size_t argmax_trial = 0;
  std::size_t trials = 0;
  std::size_t skipped = 0;
};

struct ExperimentReport {
  std::string name;
  json parameters = json::object();
  std::vector<TrialRow> trials;
  std::deque<SweepRow> rows;  // deque: references stay valid as rows are added
  std::deque<Check> checks;
  std::map<std::string, json> fits;
  std::vector<std::pair<double, double>> plot;
  std::string plot_x = "x";
  std::string plot_y = "y";
  json witness = json::object();
  json extra = json::object();
  std::size_t skipped = 0;
  bool degenerate = false;
  double max_ratio = 0;
  std::size_t argmax = 0;
  double runtime_seconds = 0;

  SweepRow& row(const std::string& label) {
    for (SweepRow& r : rows)
      if (r.label == label) return r;
    rows.push_back({label});
    return rows.back();
  }

  Check& check(const std::string& name, double tolerance = 0) { return find_or_add(checks, name, tolerance); }

  const Check* find_check(const std::string& name) const {
    for (const Check& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }

  /// Adds a trial; rhs == 0 counts as skipped (degenerate) and is not stored,
  /// unless zero_ok and lhs == 0, which records ratio 0.
  void add_trial(std::size_t trial, const std::string& group, double lhs, double rhs, bool zero_ok = false) {
    SweepRow& r = row(group);
    if (rhs == 0 && zero_ok && lhs == 0) {
      trials.push_back({trial, group, 0.0, 0.0, 0.0});
      if (r.trials == 0) r.argmax_trial = trial;
      ++r.trials;
      return;
    }
    if (rhs == 0) {
      ++skipped;
      ++r.skipped;
      return;
    }
    const double ratio = lhs / rhs;
    trials.push_back({trial, group, lhs, rhs, ratio});
    if (r.trials == 0 || ratio > r.max_ratio) {
      r.max_ratio = ratio;
      r.argmax_trial = trial;
    }
    ++r.trials;
  }

  void absorb(std::size_t trial, const TrialOutcome& o) {
    for (const auto& r : o.rows) add_trial(trial, r.group, r.lhs, r.rhs, r.zero_ok);
    for (const Check& c : o.checks) check(c.name, c.tolerance).merge(c);
  }

  void finalize() {
    max_ratio = 0;
    argmax = 0;
    for (std::size_t i = 0; i < trials.size(); ++i)
      if (i == 0 || trials[i].ratio > max_ratio) {
        max_ratio = trials[i].ratio;
        argmax = i;
      }
    degenerate = trials.empty() && skipped > 0;
  }

  bool passed() const {
    for (const Check& c : checks)
      if (!c.passed()) return false;
    return true;
  }

  double row_max(const std::string& label) const {
    for (const SweepRow& r : rows)
      if (r.label == label) return r.max_ratio;
    throw precondition_error("no sweep row '" + label + "'");
  }

  json to_json() const {
    json j;
    j["name"] = name;
    j["parameters"] = parameters;
    j["max_ratio"] = max_ratio;
    j["argmax_trial_id"] = trials.empty() ? json(nullptr) : json(argmax);
    j["trials_evaluated"] = trials.size();
    j["trials_skipped"] = skipped;
    j["degenerate"] = degenerate;
    j["passed"] = passed();
    json rs = json::array();
    for (const SweepRow& r : rows)
      rs.push_back({{"label", r.label}, {"info", r.info}, {"max_ratio", r.max_ratio},
                    {"argmax_trial", r.argmax_trial}, {"trials", r.trials}, {"skipped", r.skipped}});
    j["rows"] = rs;
    json cs = json::array();
    for (const Check& c : checks)
      cs.push_back({{"name", c.name}, {"passed", c.passed()}, {"evaluated", c.evaluated},
                    {"violations", c.violations}, {"worst", c.worst}, {"tolerance", c.tolerance},
                    {"witness", c.witness}});
    j["checks"] = cs;
    j["fits"] = fits;
    json ts = json::array();
    for (std::size_t i = 0; i < trials.size(); ++i) {
      const TrialRow& t = trials[i];
      ts.push_back({{"trial_id", i}, {"trial", t.trial}, {"group", t.group}, {"lhs", t.lhs}, {"rhs", t.rhs},
                    {"ratio", t.ratio}});
    }
    j["trials"] = ts;
    json pl = json::array();
    for (const auto& [x, y] : plot) pl.push_back({x, y});
    j["plot"] = {{"x", plot_x}, {"y", plot_y}, {"points", pl}};
    j["witness"] = witness;
    j["extra"] = extra;
    j["runtime_seconds"] = runtime_seconds;
    return j;
  }
};

}  // namespace varlab::harness
