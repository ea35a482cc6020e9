#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = COVCHAN_CLI_PATH;
const std::string kConfigs = COVCHAN_CONFIG_DIR;

struct CliRun {
  int status;
  std::string out;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("covchan_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  CliRun run(const std::string& args) const {
    const std::string stdout_file = path("stdout.txt");
    const std::string cmd = "\"" + kCli + "\" " + args + " > \"" + stdout_file + "\" 2> \"" + path("stderr.txt") + "\"";
    const int raw = std::system(cmd.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(stdout_file)};
  }

  static std::string slurp(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

std::string config(const std::string& name) { return "--config \"" + kConfigs + "/" + name + "\""; }

}  // namespace

TEST_F(CliTest, SimulateNoiselessDecodesEverything) {
  const auto r = run("simulate " + config("optimized_2mb_all_ones.json") + " --out " + path("trace.json"));
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("ber=0.000"), std::string::npos) << r.out;
  const auto j = nlohmann::json::parse(slurp(path("trace.json")));
  EXPECT_EQ(j["metrics"]["bit_errors"], 0);
  EXPECT_NEAR(j["metrics"]["throughput_bps"].get<double>(), 2.27, 0.01);
}

TEST_F(CliTest, SameSeedGivesIdenticalTrace) {
  ASSERT_EQ(run("simulate " + config("basic_2mb_mixed.json") + " --seed 3 --out " + path("a.json")).status, 0);
  ASSERT_EQ(run("simulate " + config("basic_2mb_mixed.json") + " --seed 3 --out " + path("b.json")).status, 0);
  ASSERT_EQ(run("simulate " + config("basic_2mb_mixed.json") + " --seed 4 --out " + path("c.json")).status, 0);
  const auto a = slurp(path("a.json"));
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(path("b.json")));
  EXPECT_NE(a, slurp(path("c.json")));
}

TEST_F(CliTest, TheoryPrintsCsvTable) {
  const auto r = run("theory " + config("table1_sweep.json"));
  ASSERT_EQ(r.status, 0);
  std::istringstream in(r.out);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header.rfind("cache_size_mb,read_time_s,wait_period_s,", 0), 0u);
  EXPECT_EQ(first.rfind("2.000,0.292,0.125,", 0), 0u) << first;
  EXPECT_NE(first.find("12.509,,"), std::string::npos) << first;
  EXPECT_EQ(first.back(), ',') << first;
}

TEST_F(CliTest, SweepWritesJsonLinesToFile) {
  ASSERT_EQ(run("sweep " + config("table1_sweep.json") + " --format json-lines --out " + path("rows.jsonl")).status, 0);
  std::istringstream in(slurp(path("rows.jsonl")));
  int n = 0;
  for (std::string line; std::getline(in, line); ++n) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["ber"].get<double>(), 0.0);
    EXPECT_GE(j["sim_total_s"].get<double>(), 0.0);
  }
  EXPECT_EQ(n, 6);
}

TEST_F(CliTest, DisruptComparesCodings) {
  const auto r = run("disrupt " + config("disrupt_sparse_2mb.json") + " --out " + path("cmp.json"));
  ASSERT_EQ(r.status, 0) << r.out;
  const auto j = nlohmann::json::parse(slurp(path("cmp.json")));
  EXPECT_GT(j["comparison"]["uncoded_ber"].get<double>(), 0.0);
  EXPECT_EQ(j["comparison"]["repetition3_ber"].get<double>(), 0.0);
}

TEST_F(CliTest, DisruptWithoutDisruptorFails) {
  EXPECT_NE(run("disrupt " + config("basic_2mb_mixed.json")).status, 0);
}

TEST_F(CliTest, MalformedConfigFails) {
  std::ofstream(path("bad.json")) << "{\"physical\": {\"cache_mb\": 2,}";
  EXPECT_EQ(run("simulate --config " + path("bad.json")).status, 2);
  std::ofstream(path("unknown.json")) << R"({"physical": {"cache_mb": 2, "read_rate_mbps": 7}, "message": {"bits": "1"},
                                            "colour": "red"})";
  EXPECT_EQ(run("simulate --config " + path("unknown.json")).status, 2);
  EXPECT_NE(run("simulate --config " + path("missing.json")).status, 0);
}

TEST_F(CliTest, UnwritableOutputFails) {
  EXPECT_NE(run("simulate " + config("optimized_2mb_all_ones.json") + " --out " + path("no/such/dir/t.json")).status,
            0);
}

TEST_F(CliTest, NoSubcommandFails) { EXPECT_NE(run("").status, 0); }
