#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.hpp"
#include "manquant/bounds.hpp"
#include "manquant/dataset_io.hpp"
#include "manquant/serialize.hpp"

namespace manquant {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("manquant_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }

  Json read_json(const fs::path& p) {
    std::ifstream in(p);
    return Json::parse(in);
  }

  std::string write_text(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
    return (dir_ / name).string();
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(CliTest, FitKmeansSingleCenterOnTwoPoints) {
  // Datasets live in the unit ball, so the two points are (0,0) and (1,0):
  // the centroid sits at (1/2, 0), a quarter from each point.
  const std::string data = write_text("two.csv", "0,0\n1,0\n");
  ASSERT_EQ(run({"fit-kmeans", "--data", data, "--k", "1", "--out", dir_.string()}), 0) << err_.str();
  const Json m = read_json(dir_ / "model.json");
  EXPECT_DOUBLE_EQ(m["objective"].get<double>(), 0.25);
  EXPECT_EQ(m["centers"], Json::parse("[0.5, 0.0]"));
  EXPECT_FALSE(out_.str().empty());

  const std::string outside = write_text("outside.csv", "0,0\n2,0\n");
  EXPECT_EQ(run({"fit-kmeans", "--data", outside, "--k", "1", "--out", dir_.string()}), cli::kData);
}

TEST_F(CliTest, Example1WritesResultFields) {
  ASSERT_EQ(run({"example1", "--seed", "3", "--holdout", "5000", "--out", dir_.string()}), 0) << err_.str();
  const Json j = read_json(dir_ / "example1.json");
  for (const char* key : {"e_k1", "e_k2", "inner_product", "k1_better"}) EXPECT_TRUE(j.contains(key)) << key;
}

TEST_F(CliTest, BoundsMatchesLibrary) {
  ASSERT_EQ(run({"bounds", "--preset", "sphere", "--d", "2", "--n", "10000", "--k", "16", "--delta", "0.05",
                 "--out", dir_.string()}),
            0)
      << err_.str();
  const Json j = read_json(dir_ / "bounds.json");
  EXPECT_EQ(j["statistical"].get<double>(), stat_kmeans(1e4, 16, 0.05));
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run({}), cli::kUsage);
  EXPECT_EQ(run({"no-such-command"}), cli::kUsage);
  EXPECT_EQ(run({"fit-kmeans", "--k", "2"}), cli::kUsage);
  EXPECT_EQ(run({"fit-kmeans", "--data", (dir_ / "missing.csv").string(), "--k", "2", "--out", dir_.string()}),
            cli::kData);
  const std::string garbage = write_text("bad.csv", "1,2\n3,x\n");
  EXPECT_EQ(run({"fit-kmeans", "--data", garbage, "--k", "1", "--out", dir_.string()}), cli::kData);
  const std::string tiny = write_text("tiny.csv", "0,0\n0.5,0.5\n");
  EXPECT_EQ(run({"fit-kmeans", "--data", tiny, "--k", "3", "--out", dir_.string()}), cli::kUsage);
  const std::string big = write_text("big.csv", "0\n.01\n.02\n.03\n.04\n.05\n.06\n.07\n.08\n.09\n.1\n.11\n.12\n.13\n");
  EXPECT_EQ(run({"oracle-check", "--data", big, "--k", "2", "--out", dir_.string()}), cli::kCompute);
}

TEST_F(CliTest, ConfigFileWithCommandLineOverride) {
  const std::string data = write_text("pts.csv", "0,0\n0.1,0\n0.9,0\n1,0\n");
  const std::string cfg =
      write_text("cfg.json", R"({"command": "fit-kmeans", "data": ")" + data + R"(", "k": 1, "seed": 5})");
  ASSERT_EQ(run({"--config", cfg, "--out", dir_.string()}), 0) << err_.str();
  EXPECT_EQ(read_json(dir_ / "model.json")["k"], 1);
  EXPECT_EQ(read_json(dir_ / "model.json")["seed"], 5);
  ASSERT_EQ(run({"fit-kmeans", "--config", cfg, "--k", "2", "--out", dir_.string()}), 0) << err_.str();
  const Json j = read_json(dir_ / "model.json");
  EXPECT_EQ(j["k"], 2);
  EXPECT_NEAR(j["objective"].get<double>(), 0.0025, 1e-15);
}

TEST_F(CliTest, SampleThenFitMatchesLibrary) {
  ASSERT_EQ(run({"sample", "--manifold", "sphere", "--d", "2", "--D", "3", "--n", "300", "--seed", "9", "--out",
                 dir_.string()}),
            0)
      << err_.str();
  const Dataset cli_data = read_container((dir_ / "dataset.mrc").string());
  const Dataset lib_data = sample_sphere(2, 3, 300, RngSeed{9});
  EXPECT_EQ(cli_data.points(), lib_data.points());

  ASSERT_EQ(run({"fit-kmeans", "--data", (dir_ / "dataset.mrc").string(), "--k", "6", "--seed", "4", "--restarts",
                 "3", "--out", dir_.string()}),
            0)
      << err_.str();
  FitConfig cfg;
  cfg.restarts = 3;
  const MeansModel lib = fit_kmeans(lib_data, 6, cfg, RngSeed{4});
  std::ifstream in(dir_ / "model.json");
  const std::string file((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(file, to_json(lib).dump(2) + "\n");
}

TEST_F(CliTest, FitKflatsAndOracle) {
  const std::string data = write_text("lines.csv", "0,0\n0.3,0\n0.6,0\n0,0.5\n0.3,0.5\n0.6,0.5\n");
  ASSERT_EQ(run({"fit-kflats", "--data", data, "--k", "2", "--d", "1", "--out", dir_.string()}), 0) << err_.str();
  EXPECT_LT(read_json(dir_ / "model.json")["objective"].get<double>(), 1e-12);
  ASSERT_EQ(run({"oracle-check", "--data", data, "--k", "2", "--family", "kflats", "--flat-dim", "1", "--out",
                 dir_.string()}),
            0)
      << err_.str();
  EXPECT_TRUE(fs::exists(dir_ / "oracle.json"));
}

TEST_F(CliTest, TradeoffWritesArtifacts) {
  ASSERT_EQ(run({"tradeoff", "--manifold", "sphere", "--d", "2", "--D", "3", "--n", "30,60", "--k", "1,2,4",
                 "--holdout", "2000", "--repeats", "1", "--restarts", "2", "--out", dir_.string()}),
            0)
      << err_.str();
  EXPECT_TRUE(fs::exists(dir_ / "report.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "summary.json"));
  EXPECT_TRUE(fs::exists(dir_ / "curve_n30.dat"));
  EXPECT_TRUE(fs::exists(dir_ / "curve_n60.dat"));
}

}  // namespace
}  // namespace manquant
