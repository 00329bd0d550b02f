#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mrcdd/bench.hpp"
#include "mrcdd/matrix_io.hpp"

namespace mrcdd::bench {
namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

TEST(Config, DefaultsDescribeBenchmark) {
  const ExperimentConfig c = default_config();
  EXPECT_EQ(c.plant_a, paper_plant_a());
  EXPECT_EQ(c.model_am, 0.2 * Matrix::Identity(3, 3));
  EXPECT_EQ(c.model_bm, 0.8 * Matrix::Identity(3, 3));
  EXPECT_EQ(c.t_grid, std::vector<Eigen::Index>{30000});
  EXPECT_EQ(c.variances, (std::vector<double>{0.25, 1.0}));
  EXPECT_EQ(c.mc_runs, 100);
  EXPECT_EQ(c.input_low, -2.0);
  EXPECT_EQ(c.input_high, 2.0);
  EXPECT_EQ(c.synthesis.lambda, 1.0);
  EXPECT_EQ(c.avg_experiments_for(30000), 1000);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, SectionsListsAndComments) {
  const ExperimentConfig c = parse(R"(
# benchmark subset
[experiment]
t_grid = 300, 3000
variance = 0.25 1
method = bc, iv, raw
mc_runs = 7
seed = 42
x0 = 1 2 3
; another comment style
[solver]
lambda = 2.5
gap_tol = 1e-7
[plant]
a = 0.5 0 0, 0 0.5 0, 0 0 0.5
)");
  EXPECT_EQ(c.t_grid, (std::vector<Eigen::Index>{300, 3000}));
  EXPECT_EQ(c.variances, (std::vector<double>{0.25, 1.0}));
  EXPECT_EQ(c.methods,
            (std::vector<Method>{Method::BiasCorrectedSdp, Method::IvSdp, Method::RawSdp}));
  EXPECT_EQ(c.mc_runs, 7);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.initial_state(), Vector::LinSpaced(3, 1, 3));
  EXPECT_EQ(c.synthesis.lambda, 2.5);
  EXPECT_EQ(c.synthesis.solver.duality_gap_tol, 1e-7);
  EXPECT_EQ(c.plant_a, 0.5 * Matrix::Identity(3, 3));
  EXPECT_EQ(c.plant_b, paper_plant_b());
}

TEST(Config, UnknownKeyIsNamed) {
  try {
    parse("[experiment]\nmc_run = 3\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("experiment.mc_run"), std::string::npos);
  }
  try {
    parse("[nonsense]\nkey = 1\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("nonsense.key"), std::string::npos);
  }
}

TEST(Config, BadValuesNameTheKey) {
  for (const char* text : {"[experiment]\nmc_runs = many\n", "[experiment]\nmc_runs = 0\n",
                           "[experiment]\nvariance = -1\n", "[experiment]\nmethod = magic\n",
                           "[solver]\nlambda = 1x\n", "[experiment]\nrecord_timing = maybe\n"}) {
    try {
      parse(text);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const ParseError& e) {
      EXPECT_NE(std::string(e.what()).find("config key"), std::string::npos) << e.what();
    }
  }
}

TEST(Config, StructuralErrors) {
  EXPECT_THROW(parse("mc_runs = 3\n"), ParseError);
  EXPECT_THROW(parse("[experiment\nmc_runs = 3\n"), ParseError);
  EXPECT_THROW(parse("[experiment]\ninput_low = 2\ninput_high = 1\n"), InvalidArgument);
  EXPECT_THROW(parse("[model]\nam = 0.2\n"), DimensionError);
}

TEST(Config, ApplySettingOverrides) {
  ExperimentConfig c = default_config();
  apply_setting(c, "experiment.t_len", "1000");
  apply_setting(c, "tracking.horizon", "40");
  EXPECT_EQ(c.t_grid, std::vector<Eigen::Index>{1000});
  EXPECT_EQ(c.tracking_horizon, 40);
  EXPECT_THROW(apply_setting(c, "experiment.t_len", ""), ParseError);
}

TEST(Config, FilesResolveRelativeToConfig) {
  const auto dir = std::filesystem::temp_directory_path() / "mrcdd_config_test";
  std::filesystem::create_directories(dir);
  save_matrix(dir / "am.txt", 0.1 * Matrix::Identity(3, 3));
  {
    std::ofstream out(dir / "cfg.ini");
    out << "[model]\nam_file = am.txt\n";
  }
  const ExperimentConfig c = load_config(dir / "cfg.ini");
  EXPECT_EQ(c.model_am, 0.1 * Matrix::Identity(3, 3));
  {
    std::ofstream out(dir / "bad.ini");
    out << "[model]\nam_file = missing.txt\n";
  }
  EXPECT_THROW(load_config(dir / "bad.ini"), ParseError);
  EXPECT_THROW(load_config(dir / "absent.ini"), IoError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace mrcdd::bench
