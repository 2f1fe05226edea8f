#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace metainv::cli {
namespace {

struct Result {
  int status;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "metainv");
  std::ostringstream out, err;
  const int status = run(args, out, err);
  return {status, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("metainv_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  bool empty_dir() const { return fs::is_empty(dir_); }

  fs::path dir_;
};

TEST_F(CliTest, NoSubcommandIsUsageError) {
  EXPECT_EQ(invoke({}).status, kExitUsage);
}

TEST_F(CliTest, UnknownFlagNamesToken) {
  const auto r = invoke({"gen-data", "--n", "5", "--seed", "1", "--out", path("d.msds"), "--bogus"});
  EXPECT_EQ(r.status, kExitUsage);
  EXPECT_NE(r.err.find("--bogus"), std::string::npos);
  EXPECT_TRUE(empty_dir());
}

TEST_F(CliTest, NonPositiveNumbersRejected) {
  EXPECT_EQ(invoke({"gen-data", "--n", "0", "--seed", "1", "--out", path("d.msds")}).status, kExitUsage);
  EXPECT_EQ(invoke({"gen-data", "--n", "-3", "--seed", "1", "--out", path("d.msds")}).status, kExitUsage);
  EXPECT_TRUE(empty_dir());
}

TEST_F(CliTest, GenDataReproducible) {
  ASSERT_EQ(invoke({"gen-data", "--n", "50", "--seed", "7", "--out", path("a.msds")}).status, kExitOk);
  ASSERT_EQ(invoke({"gen-data", "--n", "50", "--seed", "7", "--out", path("b.msds")}).status, kExitOk);
  EXPECT_EQ(slurp(path("a.msds")), slurp(path("b.msds")));
  EXPECT_FALSE(fs::exists(path("a.msds.partial")));
}

TEST_F(CliTest, SimulateUniformTwos) {
  const auto r = invoke({"simulate", "--codes", "2 2 2 2 2 2 2 2 2 2 2 2 2 2 2 2", "--out", path("s.csv"),
                         "--plot", path("s.svg")});
  ASSERT_EQ(r.status, kExitOk) << r.err;
  std::istringstream in(slurp(path("s.csv")));
  std::string line;
  std::getline(in, line);
  double best_f = 0, best_v = 0;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    const double f = std::stod(line.substr(0, comma));
    const double v = std::stod(line.substr(comma + 1));
    if (v < best_v) {
      best_v = v;
      best_f = f;
    }
  }
  EXPECT_NEAR(best_f, 16.0, 1e-9);
  EXPECT_NEAR(best_v, -39.99, 0.005);
  EXPECT_TRUE(fs::exists(path("s.svg")));
}

TEST_F(CliTest, SimulateBadCodesIsUsageError) {
  const auto r = invoke({"simulate", "--codes", "2 2 9", "--out", path("s.csv")});
  EXPECT_EQ(r.status, kExitUsage);
  EXPECT_TRUE(empty_dir());
}

TEST_F(CliTest, MissingDataIsDataError) {
  const auto r = invoke({"train", "--data", path("nope.msds"), "--variant", "restricted", "--out", path("m.msinn")});
  EXPECT_EQ(r.status, kExitData);
  EXPECT_FALSE(fs::exists(path("m.msinn")));
}

TEST_F(CliTest, TrainDesignEvalPipeline) {
  ASSERT_EQ(invoke({"gen-data", "--n", "60", "--seed", "3", "--out", path("d.msds")}).status, kExitOk);
  const auto t = invoke({"train", "--data", path("d.msds"), "--variant", "restricted", "--epochs", "2", "--out",
                         path("m.msinn"), "--history", path("h.csv"), "--log-every", "1"});
  ASSERT_EQ(t.status, kExitOk) << t.err;
  EXPECT_TRUE(fs::exists(path("m.msinn.manifest.json")));

  const auto bad = invoke({"design", "--model", path("m.msinn"), "--target", "15,-5,0.5", "--report", path("r.json")});
  EXPECT_EQ(bad.status, kExitUsage);
  EXPECT_FALSE(fs::exists(path("r.json")));

  const auto d = invoke({"design", "--model", path("m.msinn"), "--target", "15,-15,0.5", "--out-mask", path("m.pbm"),
                         "--out-spectrum", path("s.csv"), "--out-plot", path("s.svg"), "--report", path("r.json")});
  ASSERT_EQ(d.status, kExitOk) << d.err;
  for (const char* f : {"m.pbm", "s.csv", "s.svg", "r.json"}) EXPECT_TRUE(fs::exists(path(f))) << f;
  const auto report = nlohmann::json::parse(slurp(path("r.json")));
  EXPECT_TRUE(report.contains("codes"));
  EXPECT_TRUE(report.contains("achieved"));
  const std::string first = slurp(path("r.json"));
  ASSERT_EQ(invoke({"design", "--model", path("m.msinn"), "--target", "15,-15,0.5", "--report", path("r.json")}).status,
            kExitOk);
  EXPECT_EQ(slurp(path("r.json")), first);

  const auto e = invoke({"eval", "--model", path("m.msinn"), "--data", path("d.msds"), "--report", path("e.json"),
                         "--holdout"});
  ASSERT_EQ(e.status, kExitOk) << e.err;
  const auto metrics = nlohmann::json::parse(slurp(path("e.json")));
  EXPECT_EQ(metrics.at("metrics").at("samples").get<int>(), 18);
}

TEST_F(CliTest, DesignWithCorruptModelIsDataError) {
  {
    std::ofstream(path("m.msinn")) << "MSINN/9\n";
  }
  const auto r = invoke({"design", "--model", path("m.msinn"), "--target", "15,-15,0.5"});
  EXPECT_EQ(r.status, kExitData);
}

}  // namespace
}  // namespace metainv::cli
