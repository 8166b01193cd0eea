#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "varlab/cli/cli.hpp"

namespace varlab::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
};

/// Runs the varlab executable in cwd with stderr merged into stdout.
Result invoke(const fs::path& cwd, const std::string& args, const std::string& env = "") {
  const std::string cmd = "cd '" + cwd.string() + "' && " + env + " '" VARLAB_CLI_PATH "' " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class Scratch : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("varlab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& name, const json& j) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << j.dump(2);
    return p;
  }

  std::set<std::string> tree() const {
    std::set<std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir_)) out.insert(fs::relative(e.path(), dir_).string());
    return out;
  }

  fs::path dir_;
};

json small_jump(const std::string& out_dir) {
  return {{"experiment", "verify_jump"},
          {"seed", 3},
          {"grid", {{"d", 1}, {"K", 8}}},
          {"scales", {{"k_min", 0}, {"k_max", 4}}},
          {"ensemble", {{"count", 3}}},
          {"output", {{"dir", out_dir}}}};
}

TEST(Number, SeventeenSignificantDigits) {
  EXPECT_EQ(number(0.1), "0.10000000000000001");
  EXPECT_EQ(number(2.0), "2");
  EXPECT_EQ(std::stod(number(1.0 / 3)), 1.0 / 3);
}

TEST_F(Scratch, SmokeConfigWritesThreeFilesInsideOutputDir) {
  const Result r = invoke(dir_, "run '" VARLAB_SOURCE_DIR "/conf/verify_square.json'");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(tree(), (std::set<std::string>{"out", "out/verify_square", "out/verify_square/report.json",
                                           "out/verify_square/summary.csv", "out/verify_square/plotdata.csv"}));
  const std::string summary = slurp(dir_ / "out/verify_square/summary.csv");
  EXPECT_EQ(summary.rfind("trial_id,lhs,rhs,ratio\n", 0), 0u);
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 101);
  EXPECT_EQ(slurp(dir_ / "out/verify_square/plotdata.csv").rfind("x,y\n", 0), 0u);
}

TEST_F(Scratch, PEqualOneIsAConfigError) {
  json j = small_jump("out/p1");
  j["experiment"] = "verify_square_strong";
  j["exponents"] = {{"p", 1.0}};
  const Result r = invoke(dir_, "run " + write_config("p1.json", j).string());
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.out.find("1 < p"), std::string::npos) << r.out;
  EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(Scratch, UnknownKeyIsAConfigError) {
  json j = small_jump("out/x");
  j["grid"]["side"] = 16;
  const Result r = invoke(dir_, "run " + write_config("bad.json", j).string());
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.out.find("grid.side"), std::string::npos) << r.out;
}

TEST_F(Scratch, UnreadableAndMalformedConfigsAreConfigErrors) {
  EXPECT_EQ(invoke(dir_, "run missing.json").code, 3);
  std::ofstream(dir_ / "broken.json") << "{\"experiment\": ";
  EXPECT_EQ(invoke(dir_, "run broken.json").code, 3);
  EXPECT_EQ(invoke(dir_, "frobnicate").code, 3);
}

TEST_F(Scratch, SameConfigGivesByteIdenticalSummary) {
  const fs::path cfg = write_config("jump.json", small_jump("out/a"));
  ASSERT_EQ(invoke(dir_, "run " + cfg.string()).code, 0);
  const std::string first = slurp(dir_ / "out/a/summary.csv");
  ASSERT_EQ(invoke(dir_, "run " + cfg.string()).code, 0);
  EXPECT_EQ(slurp(dir_ / "out/a/summary.csv"), first);
  const Result serial = invoke(dir_, "run " + cfg.string(), "VARLAB_THREADS=1");
  ASSERT_EQ(serial.code, 0) << serial.out;
  EXPECT_EQ(slurp(dir_ / "out/a/summary.csv"), first);
}

TEST_F(Scratch, EmbeddedConfigRoundTrips) {
  ASSERT_EQ(invoke(dir_, "run " + write_config("jump.json", small_jump("out/a")).string()).code, 0);
  json embedded = json::parse(slurp(dir_ / "out/a/report.json"))["config"];
  EXPECT_EQ(embedded, harness::to_json(harness::make_run(small_jump("out/a"))));
  embedded["output"]["dir"] = "out/b";
  ASSERT_EQ(invoke(dir_, "run " + write_config("again.json", embedded).string()).code, 0);
  EXPECT_EQ(slurp(dir_ / "out/b/summary.csv"), slurp(dir_ / "out/a/summary.csv"));
  EXPECT_EQ(slurp(dir_ / "out/b/plotdata.csv"), slurp(dir_ / "out/a/plotdata.csv"));
}

TEST_F(Scratch, ViolatedInvariantExitsTwoWithDiagnostics) {
  const json j = {{"experiment", "geometry"},
                  {"grid", {{"d", 2}, {"K", 7}}},
                  {"ensemble", {{"count", 4}}},
                  {"params",
                   {{"k_values", {3}}, {"i_min", -2}, {"M_calibrate", 4}, {"M_verify", 4}, {"residue_grid", 4},
                    {"C_boundary", 0.5}, {"C_smooth", 4.5}}},
                  {"output", {{"dir", "out/g"}}}};
  const Result r = invoke(dir_, "run " + write_config("geo.json", j).string());
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_NE(r.out.find("boundary_count_bound"), std::string::npos) << r.out;
  const json rep = json::parse(slurp(dir_ / "out/g/report.json"));
  ASSERT_TRUE(rep.contains("diagnostics"));
  EXPECT_EQ(rep["diagnostics"]["violated"][0]["invariant"], "boundary_count_bound");
  EXPECT_TRUE(rep["diagnostics"].contains("witness_seed"));
}

TEST_F(Scratch, ListExperimentsShowsEveryEntryOnce) {
  const Result r = invoke(dir_, "list-experiments");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("verify_jump"), std::string::npos);
  EXPECT_NE(r.out.find("weighted jump inequality"), std::string::npos);
  std::istringstream in(r.out);
  std::string line;
  std::set<std::string> names;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == ' ' || line.rfind("name", 0) == 0) continue;
    names.insert(line.substr(0, line.find(' ')));
    ++rows;
  }
  EXPECT_EQ(rows, 15u);
  EXPECT_EQ(names.size(), 15u);
}

TEST_F(Scratch, OracleSpotChecks) {
  Result r = invoke(dir_, "oracle hvar 2 0 1 0 1");
  ASSERT_EQ(r.code, 0) << r.out;
  json j = json::parse(r.out);
  EXPECT_NEAR(j["value"].get<double>(), std::sqrt(3.0), 1e-12);
  EXPECT_EQ(j["witness"], (json{0, 1, 2, 3}));

  r = invoke(dir_, "oracle var_inhom 2 0 1 0 1");
  EXPECT_NEAR(json::parse(r.out)["value"].get<double>(), 1 + std::sqrt(3.0), 1e-12);

  r = invoke(dir_, "oracle jump 1 0 0.6 -0.6");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(json::parse(r.out)["count"], 1);
  r = invoke(dir_, "oracle jump_bruteforce 0.5 0 1 0 1 0");
  EXPECT_EQ(json::parse(r.out)["count"], 4);
  r = invoke(dir_, "oracle hvar_bruteforce 1 dim=2 0 0 3 4 0 0");
  EXPECT_NEAR(json::parse(r.out)["value"].get<double>(), 10, 1e-12);

  EXPECT_EQ(invoke(dir_, "oracle spline 2 0 1").code, 3);
  EXPECT_EQ(invoke(dir_, "oracle hvar 2 0 one").code, 3);
  EXPECT_EQ(invoke(dir_, "oracle hvar 0.5 0 1").code, 3);
  EXPECT_EQ(invoke(dir_, "oracle jump 0 0 1").code, 3);
  EXPECT_EQ(invoke(dir_, "oracle hvar_bruteforce 2 0 1 2 3 4 5 6 7 8 9 10 11 12 13 14").code, 3);
}

TEST_F(Scratch, AtomicWriterLeavesNoTemporaries) {
  write_atomic(dir_ / "a.txt", "first");
  write_atomic(dir_ / "a.txt", "second");
  EXPECT_EQ(slurp(dir_ / "a.txt"), "second");
  EXPECT_EQ(tree(), (std::set<std::string>{"a.txt"}));
}

TEST(InProcess, RunConfigReportsErrorsOnStreams) {
  std::ostringstream out, err;
  EXPECT_EQ(run_config("/nonexistent/config.json", out, err), kConfigError);
  EXPECT_NE(err.str().find("cannot read"), std::string::npos);
}

}  // namespace
}  // namespace varlab::cli
