#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "incmart/cli/artifacts.hpp"
#include "incmart/cli/commands.hpp"
#include "incmart/cli/config.hpp"
#include "incmart/cli/experiments.hpp"
#include "incmart/errors.hpp"

using namespace incmart;
using namespace incmart::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("incmart_test_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

struct CliRun {
  int code;
  std::string out, err;
};

CliRun invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigurationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, ParsesAllSections) {
  const ExperimentConfig c = parse_config(
      "# comment\n"
      "name = demo\n"
      "model = levy_r   ; trailing comment\n"
      "grid = -5:5:100\n"
      "spacing = uniform\n"
      "paths = 42\n"
      "seed = 9\n"
      "threads = 2\n"
      "out = somewhere\n"
      "[model]\n"
      "rate = 3\n"
      "jump_law = rademacher\n"
      "[test]\n"
      "buckets = 7\n"
      "cutoffs = 0.5, 1, 2\n"
      "[integrand]\n"
      "phi = exp(1)\n");
  EXPECT_EQ(c.name, "demo");
  EXPECT_EQ(model_name(c.model), "levy_r");
  EXPECT_EQ(std::get<LevyR>(c.model).rate, 3.0);
  EXPECT_EQ(std::get<LevyR>(c.model).jump_law, JumpLaw::rademacher);
  EXPECT_EQ(c.grid.t_min, -5.0);
  EXPECT_EQ(c.grid.t_max, 5.0);
  EXPECT_EQ(c.grid.n_cells, 100U);
  EXPECT_EQ(c.n_paths, 42U);
  EXPECT_EQ(c.seed, 9U);
  EXPECT_EQ(c.threads, 2U);
  EXPECT_EQ(c.out, "somewhere");
  EXPECT_EQ(c.test_count("buckets", 1), 7U);
  EXPECT_EQ(c.test_list("cutoffs", {}), (std::vector<double>{0.5, 1, 2}));
  EXPECT_EQ(c.test_real("tol", 0.25), 0.25);
  EXPECT_EQ(c.integrand_text("phi", ""), "exp(1)");
  EXPECT_EQ(c.integrand_text("psi", "const(1)"), "const(1)");
}

TEST(Config, LogTailSpacing) {
  const ExperimentConfig c = parse_config("grid = -1000:0:100\nspacing = log-tail\n");
  EXPECT_EQ(c.grid.spacing, GridSpacing::log_tail);
  const GridPtr g = c.grid.build();
  EXPECT_EQ(g->size(), 101U);
  EXPECT_EQ(g->t_min(), -1000.0);
}

TEST(Config, ReportsEveryErrorWithLineNumbers) {
  const std::string what = config_error(
      "grid = 5:1:10\n"
      "paths = -3\n"
      "bogus = 1\n"
      "[test]\n"
      "nonsense = 2\n"
      "[weird]\n"
      "no equals sign\n");
  EXPECT_NE(what.find("line 1"), std::string::npos) << what;
  EXPECT_NE(what.find("line 2"), std::string::npos) << what;
  EXPECT_NE(what.find("line 3"), std::string::npos) << what;
  EXPECT_NE(what.find("line 5"), std::string::npos) << what;
  EXPECT_NE(what.find("line 6"), std::string::npos) << what;
  EXPECT_NE(what.find("line 7"), std::string::npos) << what;
}

TEST(Config, RejectsBadValues) {
  for (const char* text : {"grid = 0:1\n", "grid = 0:1:1\n", "grid = a:1:10\n", "spacing = cubic\n",
                           "seed = -1\n", "threads = 0\n", "model = nope\n",
                           "model = levy_r\n[model]\nrate = -1\n", "[test]\ncutoffs = 1,x\n",
                           "[integrand]\nphi = sin(1)\n"}) {
    EXPECT_FALSE(config_error(text).empty()) << text;
  }
  EXPECT_THROW(parse_grid("1:0:10"), ConfigurationError);
  EXPECT_EQ(parse_grid("-2:3:7").n_cells, 7U);
}

TEST(Config, TextRoundTrip) {
  for (const auto& e : registry()) {
    const ExperimentConfig c = default_config(e);
    const ExperimentConfig back = parse_config(to_text(c));
    EXPECT_EQ(to_text(back), to_text(c)) << e.name;
    EXPECT_EQ(config_json(back), config_json(c)) << e.name;
  }
}

TEST(Config, ShippedFilesMatchRegistryDefaults) {
  for (const auto& e : registry()) {
    const fs::path file = fs::path(INCMART_CONFIG_DIR) / (e.name + ".conf");
    ASSERT_TRUE(fs::exists(file)) << file;
    EXPECT_EQ(config_json(parse_config(slurp(file))), config_json(default_config(e))) << e.name;
  }
  EXPECT_NO_THROW(parse_config(slurp(fs::path(INCMART_CONFIG_DIR) / "example_levy.conf")));
}

TEST(Registry, ElevenExperimentsWithBudgets) {
  ASSERT_EQ(registry().size(), 11U);
  for (const auto& e : registry()) {
    EXPECT_GT(e.budget_seconds, 0.0) << e.name;
    EXPECT_FALSE(e.description.empty()) << e.name;
  }
  EXPECT_THROW(find_experiment("nope"), ConfigurationError);
}

TEST(Artifacts, CommitWritesAllFiles) {
  const fs::path dir = scratch("commit") / "nested";
  ArtifactSet a;
  a.add("a.txt", "one");
  a.add("b.txt", "two");
  a.add("a.txt", "three");
  a.commit(dir);
  EXPECT_EQ(slurp(dir / "a.txt"), "three");
  EXPECT_EQ(slurp(dir / "b.txt"), "two");
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(dir)) ++n;
  EXPECT_EQ(n, 2U);
}

TEST(Artifacts, FailedCommitLeavesNothing) {
  const fs::path base = scratch("blocked");
  fs::create_directories(base);
  { std::ofstream(base / "file") << "x"; }
  ArtifactSet a;
  a.add("a.txt", "one");
  // A directory below a regular file cannot be created, even as root.
  EXPECT_THROW(a.commit(base / "file" / "out"), IoError);
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(base)) ++n;
  EXPECT_EQ(n, 1U);
}

TEST(Artifacts, FailedRenameRollsBackEarlierFiles) {
  const fs::path dir = scratch("rollback");
  // A directory squatting on the second file's name makes its rename fail.
  fs::create_directories(dir / "b.txt" / "occupied");
  ArtifactSet a;
  a.add("a.txt", "one");
  a.add("b.txt", "two");
  EXPECT_THROW(a.commit(dir), IoError);
  EXPECT_FALSE(fs::exists(dir / "a.txt"));
  EXPECT_FALSE(fs::exists(dir / ".a.txt.partial"));
  EXPECT_FALSE(fs::exists(dir / ".b.txt.partial"));
  EXPECT_TRUE(fs::exists(dir / "b.txt" / "occupied"));
}

TEST(Cli, ListAndConfig) {
  const CliRun list = invoke({"experiment", "list"});
  EXPECT_EQ(list.code, kExitPass);
  for (const auto& e : registry()) EXPECT_NE(list.out.find(e.name), std::string::npos);
  const CliRun show = invoke({"experiment", "config", "qv_brownian"});
  EXPECT_EQ(show.code, kExitPass);
  EXPECT_EQ(show.out, find_experiment("qv_brownian").default_config);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(invoke({"experiment", "run", "nope"}).code, kExitUsage);
  EXPECT_EQ(invoke({"simulate", "--model", "levy_r", "--param", "rate=-1"}).code, kExitUsage);
  EXPECT_EQ(invoke({"simulate", "--param", "novalue"}).code, kExitUsage);
  EXPECT_EQ(invoke({"--grid", "1:0:10", "simulate"}).code, kExitUsage);
  EXPECT_EQ(invoke({"integrate", "--phi", "sin(1)"}).code, kExitUsage);
  const CliRun bad = invoke({"experiment", "run", "nope"});
  EXPECT_NE(bad.err.find("qv_brownian"), std::string::npos) << bad.err;
}

TEST(Cli, IoErrorsExitThree) {
  const fs::path base = scratch("io");
  fs::create_directories(base);
  { std::ofstream(base / "file") << "x"; }
  const CliRun r = invoke({"--out", (base / "file" / "out").string(), "--paths", "5", "simulate"});
  EXPECT_EQ(r.code, kExitIo) << r.err;
  EXPECT_EQ(invoke({"simulate", "--config", (base / "missing.conf").string()}).code, kExitIo);
}

TEST(Cli, SimulateWritesSummary) {
  const fs::path dir = scratch("simulate");
  const CliRun r = invoke({"--out", dir.string(), "--paths", "8", "--grid", "0:1:50", "simulate",
                        "--model", "levy_r", "--param", "rate=2"});
  ASSERT_EQ(r.code, kExitPass) << r.err;
  for (const char* f : {"summary.json", "run_meta.json", "ensemble.csv", "path0.csv", "paths.svg"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  EXPECT_EQ(summary["schema_version"], kSummarySchemaVersion);
  EXPECT_EQ(summary["csv_schema_version"], kCsvSchemaVersion);
  EXPECT_EQ(summary["config"]["paths"], 8);
  EXPECT_TRUE(summary["passed"].get<bool>());
  const auto meta = nlohmann::json::parse(slurp(dir / "run_meta.json"));
  EXPECT_TRUE(meta.contains("elapsed_seconds"));
}

TEST(Cli, FailingCheckExitsOneWithFailureList) {
  const fs::path dir = scratch("mtest");
  // A drifting process fails the martingale test.
  const CliRun r = invoke({"--out", dir.string(), "--paths", "2000", "--grid", "0:2:100", "mtest",
                        "--model", "levy_r", "--param", "drift=0.5", "--s", "0.5", "--t", "1.5"});
  EXPECT_EQ(r.code, kExitCheckFailed) << r.out << r.err;
  const auto failures = nlohmann::json::parse(r.err.substr(r.err.find('[')));
  ASSERT_TRUE(failures.is_array());
  EXPECT_FALSE(failures.empty());
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
}

TEST(Cli, SummaryIndependentOfThreads) {
  const fs::path one = scratch("threads1"), four = scratch("threads4");
  ASSERT_EQ(invoke({"--out", one.string(), "--threads", "1", "experiment", "run", "core_identities"}).code,
            kExitPass);
  ASSERT_EQ(invoke({"--out", four.string(), "--threads", "4", "experiment", "run", "core_identities"}).code,
            kExitPass);
  auto strip_threads = [](nlohmann::json j) {
    j["config"].erase("threads");
    return j;
  };
  const auto a = nlohmann::json::parse(slurp(one / "summary.json"));
  const auto b = nlohmann::json::parse(slurp(four / "summary.json"));
  EXPECT_EQ(strip_threads(a), strip_threads(b));
  EXPECT_EQ(slurp(one / "defects.csv"), slurp(four / "defects.csv"));
}

TEST(Cli, SeedOverrideChangesResults) {
  const fs::path a = scratch("seed_a"), b = scratch("seed_b");
  ASSERT_EQ(invoke({"--out", a.string(), "--seed", "1", "--paths", "4", "simulate"}).code, kExitPass);
  ASSERT_EQ(invoke({"--out", b.string(), "--seed", "2", "--paths", "4", "simulate"}).code, kExitPass);
  EXPECT_NE(slurp(a / "ensemble.csv"), slurp(b / "ensemble.csv"));
}
