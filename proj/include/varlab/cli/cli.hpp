#pragma once

// Command implementations behind the varlab executable. Each returns the
// process exit code: 0 success, 2 invariant violated, 3 config error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "varlab/harness/registry.hpp"
#include "varlab/variation.hpp"

namespace varlab::cli {

using harness::json;

enum ExitCode : int { kSuccess = 0, kCheckFailed = 2, kConfigError = 3 };

inline std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Writes via a sibling temporary file and a rename.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string summary_csv(const harness::ExperimentReport& rep) {
  std::ostringstream os;
  os << "trial_id,lhs,rhs,ratio\n";
  for (std::size_t i = 0; i < rep.trials.size(); ++i) {
    const auto& t = rep.trials[i];
    os << i << ',' << number(t.lhs) << ',' << number(t.rhs) << ',' << number(t.ratio) << '\n';
  }
  return os.str();
}

inline std::string plot_csv(const harness::ExperimentReport& rep) {
  std::ostringstream os;
  os << "x,y\n";
  for (const auto& [x, y] : rep.plot) os << number(x) << ',' << number(y) << '\n';
  return os.str();
}

/// Names the violated checks and the seed needed to regenerate the witness.
inline json diagnostics(const harness::ExperimentReport& rep) {
  json v = json::array();
  for (const auto& c : rep.checks)
    if (!c.passed())
      v.push_back({{"invariant", c.name}, {"violations", c.violations}, {"worst", c.worst}, {"where", c.witness}});
  json seed = rep.witness.contains("trial_seed") ? rep.witness["trial_seed"] : json(nullptr);
  return {{"violated", v}, {"witness_seed", seed}, {"config_seed", rep.parameters.value("seed", json(nullptr))}};
}

inline json report_json(const harness::ExperimentReport& rep) {
  json j = rep.to_json();
  j["config"] = rep.parameters;
  if (!rep.passed()) j["diagnostics"] = diagnostics(rep);
  return j;
}

/// Writes report.json, summary.csv and plotdata.csv into dir.
inline void write_outputs(const harness::ExperimentReport& rep, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_atomic(dir / "report.json", report_json(rep).dump(2) + "\n");
  write_atomic(dir / "summary.csv", summary_csv(rep));
  write_atomic(dir / "plotdata.csv", plot_csv(rep));
}

inline void print_failure(const harness::ExperimentReport& rep, std::ostream& err) {
  const json d = diagnostics(rep);
  err << "FAILED " << rep.name << "\n";
  for (const auto& v : d["violated"])
    err << "  invariant " << v["invariant"].get<std::string>() << ": " << v["violations"] << " violation(s), worst "
        << v["worst"] << " at " << v["where"].get<std::string>() << "\n";
  err << "  witness seed " << d["witness_seed"] << " (config seed " << d["config_seed"] << ")\n";
}

inline int run_params(const harness::RunParams& c, std::ostream& out, std::ostream& err) {
  harness::ExperimentReport rep;
  try {
    rep = harness::run(c);
  } catch (const precondition_error& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  write_outputs(rep, c.output_dir);
  out << rep.name << ": max_ratio " << number(rep.max_ratio) << ", " << rep.trials.size() << " trials ("
      << rep.skipped << " skipped), " << std::fixed << std::setprecision(2) << rep.runtime_seconds << " s -> "
      << c.output_dir << "\n";
  out.unsetf(std::ios::fixed);
  out << std::setprecision(6);
  if (!rep.passed()) {
    print_failure(rep, err);
    return kCheckFailed;
  }
  return kSuccess;
}

inline int run_config(const std::string& path, std::ostream& out, std::ostream& err) {
  std::ifstream in(path);
  if (!in) {
    err << "config error: cannot read " << path << "\n";
    return kConfigError;
  }
  harness::RunParams c;
  try {
    c = harness::make_run(json::parse(in));
  } catch (const json::exception& e) {
    err << "config error: " << path << ": " << e.what() << "\n";
    return kConfigError;
  } catch (const precondition_error& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  return run_params(c, out, err);
}

inline void list_experiments(std::ostream& out) {
  out << std::left << std::setw(26) << "name" << std::setw(8) << "kind" << "anchor\n";
  for (const auto& e : harness::registry()) {
    out << std::setw(26) << e.name << std::setw(8) << e.kind << e.anchor << "\n";
    out << "    " << e.description << "\n";
    out << "    required: experiment; optional:";
    for (const auto& p : e.parameters()) out << ' ' << p;
    out << "\n";
  }
}

inline const std::vector<std::string>& oracle_ops() {
  static const std::vector<std::string> ops = {"hvar", "hvar_bruteforce", "var_inhom", "jump", "jump_bruteforce"};
  return ops;
}

/// oracle <op> <exponent|lambda> <values...>, with an optional dim=<n>
/// argument for vector-valued samples. Prints one JSON object.
inline int oracle(const std::string& op, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    require(args.size() >= 2, "usage: oracle <op> <r|lambda> [dim=<n>] <values...>");
    const double param = std::stod(args[0]);
    std::size_t dim = 1, first = 1;
    if (args[1].rfind("dim=", 0) == 0) {
      dim = std::stoul(args[1].substr(4));
      first = 2;
    }
    std::vector<double> values;
    for (std::size_t i = first; i < args.size(); ++i) values.push_back(std::stod(args[i]));
    require(dim >= 1 && !values.empty() && values.size() % dim == 0, "value count must be a positive multiple of dim");
    const SampledPath p = SampledPath::from_values(values, dim);
    json res = {{"op", op}, {"n", p.size()}, {"dim", dim}};
    if (op == "hvar") {
      const VariationResult v = hvar_exact(p, param);
      res["r"] = param;
      res["value"] = v.value;
      res["witness"] = v.witness;
    } else if (op == "hvar_bruteforce") {
      res["r"] = param;
      res["value"] = hvar_bruteforce(p, param);
    } else if (op == "var_inhom") {
      res["r"] = param;
      res["value"] = var_inhom(p, param);
    } else if (op == "jump") {
      const JumpRecord j = jump_count(p, param);
      res["lambda"] = param;
      res["count"] = j.count;
      res["witness"] = j.witness;
    } else if (op == "jump_bruteforce") {
      res["lambda"] = param;
      res["count"] = jump_bruteforce(p, param);
    } else {
      std::string known;
      for (const auto& o : oracle_ops()) known += (known.empty() ? "" : ", ") + o;
      throw precondition_error("unknown oracle op '" + op + "' (" + known + ")");
    }
    out << res.dump() << "\n";
    return kSuccess;
  } catch (const precondition_error& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const std::logic_error& e) {
    err << "config error: malformed number (" << e.what() << ")\n";
  }
  return kConfigError;
}

}  // namespace varlab::cli
