#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "tourism/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code = -1;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           (std::string("tourism_cli_") + info->name() + "_" +
            std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) const {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  // Calls the entry point in-process with the given arguments.
  static Invocation call(std::vector<std::string> args) {
    args.insert(args.begin(), "tourism");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream o, e;
    Invocation r;
    r.code = tourism::cli::run(static_cast<int>(argv.size()), argv.data(), o, e);
    r.out = o.str();
    r.err = e.str();
    return r;
  }

  // Runs the built executable through the shell.
  int exec(const std::string& args) const {
    const std::string cmd = std::string(TOURISM_CLI_PATH) + " " + args + " > " +
                            (dir_ / "stdout.txt").string() + " 2> " +
                            (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path dir_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Data lines of a CSV, skipping the '#' metadata block.
std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.starts_with('#')) out.push_back(line);
  }
  return out;
}

}  // namespace

TEST_F(CliTest, SimulateZeroPolicy) {
  const auto cfg = write("c.json", R"({
  "preset": "juneau",
  "policy": {"tax_rate": 0, "env_ratio": 0, "dev_incentive": 0,
             "capacity_limit": 0, "ship_limit": 0, "carbon_fee": 0,
             "glacier_ratio": 0}
})");
  const auto out = dir_ / "sim";
  EXPECT_EQ(exec("simulate --config " + cfg.string() + " --out " + out.string()), 0)
      << slurp(dir_ / "stderr.txt");
  const auto rows = lines_of(out / "trajectory.csv");
  ASSERT_GE(rows.size(), 3u);
  EXPECT_EQ(rows[0].rfind("year,visitors,environment,satisfaction", 0), 0u);
  const auto j = nlohmann::json::parse(slurp(out / "objectives.json"));
  EXPECT_TRUE(j.contains("f1"));
  EXPECT_EQ(j["meta"]["command"], "simulate");
  EXPECT_EQ(j["meta"]["tool"], "tourism");
}

TEST_F(CliTest, MissingSourceIsConfigError) {
  const auto r = call({"simulate", "--out", (dir_ / "x").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("preset"), std::string::npos);
}

TEST_F(CliTest, BadPresetFlagIsConfigError) {
  EXPECT_EQ(exec("simulate --preset oslo --out " + (dir_ / "x").string()), 2);
}

TEST_F(CliTest, SeedRequiredForOptimize) {
  const auto cfg = write("c.json", R"({"preset": "juneau",
    "optimize": {"population": 8, "generations": 2}})");
  const auto r = call({"optimize", "--config", cfg.string(), "--out",
                       (dir_ / "o").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("seed"), std::string::npos);
}

TEST_F(CliTest, UnknownMethodIsConfigError) {
  const auto cfg = write("c.json", R"({"preset": "juneau", "seed": 1,
    "sensitivity": {"method": "fast"}})");
  const auto r = call({"sensitivity", "--config", cfg.string(), "--out",
                       (dir_ / "s").string()});
  EXPECT_EQ(r.code, 2);
}

TEST_F(CliTest, MalformedJsonReportsLine) {
  const auto cfg = write("bad.json", "{\n  \"preset\": \"juneau\",\n  \"seed\": ,\n}\n");
  const auto r = call({"simulate", "--config", cfg.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(cfg.string() + ":3:"), std::string::npos) << r.err;
}

TEST_F(CliTest, SchemaErrorReportsLine) {
  const auto cfg = write("c.json", "{\n  \"preset\": \"juneau\",\n  \"policy\": {\n"
                                   "    \"tax_rte\": 0.1\n  }\n}\n");
  const auto r = call({"simulate", "--config", cfg.string(), "--out",
                       (dir_ / "x").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(":4"), std::string::npos) << r.err;
}

TEST_F(CliTest, MissingDatasetFileIsDataError) {
  const auto cfg = write("c.json", R"({"dataset": "/nonexistent/data.csv"})");
  const auto r = call({"simulate", "--config", cfg.string(), "--out",
                       (dir_ / "x").string()});
  EXPECT_EQ(r.code, 3);
}

TEST_F(CliTest, SynthThenDatasetRoundTrip) {
  ASSERT_EQ(call({"synth", "--preset", "juneau", "--out", (dir_ / "d").string()}).code,
            0);
  const auto cfg = write("c.json", "{\"dataset\": \"" +
                                       (dir_ / "d" / "dataset.csv").string() + "\"}");
  const auto r = call({"simulate", "--config", cfg.string(), "--out",
                       (dir_ / "s").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "s" / "trajectory.csv"));
}

TEST_F(CliTest, OptimizeOutputs) {
  const auto cfg = write("c.json", R"({"preset": "juneau",
    "optimize": {"population": 12, "generations": 3}})");
  const auto out = dir_ / "o";
  const auto r = call({"optimize", "--config", cfg.string(), "--seed", "5", "--out",
                       out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto front = lines_of(out / "front.csv");
  ASSERT_GE(front.size(), 2u);
  EXPECT_EQ(front[0],
            "tax_rate,env_ratio,dev_incentive,capacity_limit,ship_limit,carbon_fee,"
            "glacier_ratio,f1,f2,f3");
  EXPECT_EQ(lines_of(out / "hypervolume.csv").size(), 4u + 1u);
  const auto bubble = nlohmann::json::parse(slurp(out / "bubble.json"));
  EXPECT_EQ(bubble["meta"]["seed"], "5");
}

TEST_F(CliTest, SobolColumns) {
  const auto cfg = write("c.json", R"({"preset": "juneau", "seed": 3,
    "sensitivity": {"method": "sobol", "n": 64, "bootstrap": 50, "output": "f2"}})");
  const auto out = dir_ / "s";
  const auto r = call({"sensitivity", "--config", cfg.string(), "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines_of(out / "sobol.csv");
  EXPECT_EQ(rows[0],
            "output,rank,parameter,S_i,S_i_low,S_i_high,S_Ti,S_Ti_low,S_Ti_high");
  EXPECT_EQ(rows.size(), 1u + 12u);
}

TEST_F(CliTest, MorrisRowsPerParameter) {
  const auto cfg = write("c.json", R"({"preset": "iceland", "seed": 3,
    "sensitivity": {"method": "morris", "trajectories": 10, "output": "f1"}})");
  const auto out = dir_ / "m";
  const auto r = call({"sensitivity", "--config", cfg.string(), "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines_of(out / "morris.csv");
  EXPECT_EQ(rows[0], "output,rank,parameter,mu_star,mu,sigma");
  EXPECT_EQ(rows.size(), 1u + 12u);
  const auto m = nlohmann::json::parse(slurp(out / "matrix.json"));
  EXPECT_EQ(m["meta"]["method"], "morris");
}

TEST_F(CliTest, ScenarioDefaultsAndEmptyList) {
  const auto out = dir_ / "sc";
  const auto r = call({"scenario", "--preset", "juneau", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(out / "scenarios.json"));
  EXPECT_EQ(j["scenarios"].size(), 4u);
  const auto cfg = write("c.json", R"({"preset": "juneau", "scenario": {"scenarios": []}})");
  const auto bad = call({"scenario", "--config", cfg.string(), "--out",
                         (dir_ / "sc2").string()});
  EXPECT_NE(bad.code, 0);
}

TEST_F(CliTest, ScenarioFromFile) {
  const auto cfg = write("c.json", R"({"preset": "iceland", "scenario": {"scenarios": [
    {"name": "a", "env": 0.5, "infra": 0.1, "community": 0.1, "marketing": 0.1},
    {"name": "b", "env": 0.1, "infra": 0.5, "community": 0.1, "marketing": 0.1},
    {"name": "c", "env": 0.1, "infra": 0.1, "community": 0.5, "marketing": 0.1},
    {"name": "d", "env": 0.1, "infra": 0.1, "community": 0.1, "marketing": 0.5}]}})");
  const auto out = dir_ / "sc";
  const auto r = call({"scenario", "--config", cfg.string(), "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines_of(out / "scenarios.csv");
  std::set<std::string> names;
  for (std::size_t i = 1; i < rows.size(); ++i) names.insert(rows[i].substr(0, rows[i].find(',')));
  EXPECT_EQ(names, (std::set<std::string>{"a", "b", "c", "d"}));
}

TEST_F(CliTest, RedistributeDefaults) {
  const auto out = dir_ / "f";
  const auto r = call({"redistribute", "--preset", "iceland", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines_of(out / "flow.csv");
  EXPECT_EQ(rows[0], "site,year,V,E,S,share,weight");
  EXPECT_EQ(rows.size(), 1u + 7u * 10u);
  const auto j = nlohmann::json::parse(slurp(out / "flow_final.json"));
  EXPECT_EQ(j["distribution"].size(), 7u);
}

TEST_F(CliTest, ReRunsAreByteIdentical) {
  const auto cfg = write("c.json", R"({"preset": "iceland", "seed": 11,
    "optimize": {"population": 12, "generations": 3}})");
  for (const std::string cmd : {"optimize", "simulate", "scenario"}) {
    ASSERT_EQ(exec(cmd + " --config " + cfg.string() + " --out " + (dir_ / "r1").string()), 0);
    ASSERT_EQ(exec(cmd + " --config " + cfg.string() + " --out " + (dir_ / "r2").string()), 0);
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(dir_ / "r1")) {
    const auto other = dir_ / "r2" / entry.path().filename();
    ASSERT_TRUE(fs::exists(other));
    EXPECT_EQ(slurp(entry.path()), slurp(other)) << entry.path().filename();
    ++compared;
  }
  EXPECT_GE(compared, 6u);
}

TEST_F(CliTest, VersionFlag) {
  const auto r = call({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("1.0.0"), std::string::npos);
}
