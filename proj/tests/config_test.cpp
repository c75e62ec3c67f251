#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "semrate/config.hpp"

namespace semrate {
namespace {

namespace fs = std::filesystem;

std::string field_of(const std::string& text, const fs::path& dir = fs::current_path()) {
  try {
    parse_run_config(text, dir);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

const std::string kEm = "[error_model]\nfloor = 0.05\nceil = 0.8\nscale = 6\n";
const std::string kBase = "actions = 10,15,20\n" + kEm;

std::string with_top(const std::string& extra) { return "actions = 10,15,20\n" + extra + kEm; }

TEST(ConfigTest, ExampleParses) {
  const auto cfg = parse_run_config(std::string(kExampleConfig));
  EXPECT_EQ(cfg.actions(), ActionSet({10, 15, 20}));
  EXPECT_EQ(cfg.sim.horizon, 1e6);
  EXPECT_EQ(cfg.sim.warmup, 1e5);
  EXPECT_EQ(cfg.sim.seed, 1u);
  ASSERT_TRUE(cfg.simulate);
  EXPECT_EQ(cfg.simulate->policy, Policy::queue_dpp(10.0));
  EXPECT_EQ(cfg.simulate->epsilon, 0.2);
  ASSERT_TRUE(cfg.sweep);
  EXPECT_EQ(cfg.sweep->v_grid, default_v_grid());
  EXPECT_EQ(cfg.sweep->policies.size(), 4u);
  EXPECT_EQ(cfg.sweep->seeds, 5);
  EXPECT_EQ(cfg.sweep->objective, Objective::Delay);
}

TEST(ConfigTest, Defaults) {
  const auto cfg = parse_run_config(with_top("horizon = 5000\n"));
  EXPECT_EQ(cfg.sim.warmup, 500.0);
  EXPECT_EQ(cfg.sim.backlog_cap, 1'000'000);
  EXPECT_FALSE(cfg.sim.drain);
  EXPECT_FALSE(cfg.simulate);
  EXPECT_FALSE(cfg.sweep);
}

TEST(ConfigTest, ErrorsNameTheField) {
  EXPECT_EQ(field_of(kBase + "[simulate]\nlambda = 0.04\nepsilon = 1.5\npolicy = dpp-queue\n"), "simulate.epsilon");
  EXPECT_EQ(field_of(kBase + "[simulate]\nlambda = -1\nepsilon = 0.2\npolicy = dpp-queue\n"), "simulate.lambda");
  EXPECT_EQ(field_of(kBase + "[simulate]\nlambda = 0.04\nepsilon = 0.2\npolicy = fixed:12\n"), "simulate.policy");
  EXPECT_EQ(field_of(kBase + "[sweep]\nlambdas = 0.02,0.01\nepsilons = 0.2\npolicies = dpp-queue\n"), "sweep.lambdas");
  EXPECT_EQ(field_of(kBase + "[sweep]\nlambdas = 0.01\nepsilons = 0.2,0\npolicies = dpp-queue\n"), "sweep.epsilons");
  EXPECT_EQ(field_of(kBase + "[sweep]\nlambdas = 0.01\nepsilons = 0.2\npolicies = dpp-queue\nobjective = x\n"),
            "sweep.objective");
  EXPECT_EQ(field_of(kBase + "[sweep]\nlambdas = 0.01\nepsilons = 0.2\npolicies = dpp-queue\nv_grid = 1,0\n"),
            "sweep.v_grid");
  EXPECT_EQ(field_of(with_top("colour = red\n")), "colour");
  EXPECT_EQ(field_of(kBase + "[simulate]\nlamda = 0.1\n"), "simulate.lamda");
  EXPECT_EQ(field_of(kBase + "[extra]\nx = 1\n"), "extra");
  EXPECT_EQ(field_of(with_top("horizon = 10\nwarmup = 20\n")), "warmup");
  EXPECT_EQ(field_of(with_top("seed = -3\n")), "seed");
  EXPECT_EQ(field_of("actions = 10,10\n[error_model]\nfloor = 0.05\nceil = 0.8\nscale = 6\n"), "actions");
  EXPECT_EQ(field_of("actions = 10\n"), "error_model");
}

TEST(ConfigTest, TableRelativeToConfigDirectory) {
  const fs::path dir = fs::temp_directory_path() / "semrate_config_test";
  fs::create_directories(dir);
  std::ofstream(dir / "curve.csv") << "n,p_e\n10,0.30\n15,0.22\n20,0.18\n";
  std::ofstream(dir / "run.ini") << "actions = 10,15,20\n[error_model]\ntable = curve.csv\nsnr = 5dB\n";
  const auto cfg = load_run_config(dir / "run.ini");
  EXPECT_DOUBLE_EQ(cfg.curve(15), 0.22);
  EXPECT_EQ(cfg.curve.snr_tag(), "5dB");
  std::ofstream(dir / "bad.ini") << "actions = 10,15,20\n[error_model]\ntable = missing.csv\n";
  EXPECT_EQ(field_of("actions = 10,15,20\n[error_model]\ntable = missing.csv\n", dir), "error_model.table");
  EXPECT_EQ(field_of("actions = 10,15,20\n[error_model]\ntable = curve.csv\nfloor = 0.1\n", dir), "error_model");
  fs::remove_all(dir);
}

TEST(ConfigTest, ShippedConfigsParse) {
  for (const char* name : {"delay_load_curve.ini", "aoi_load_curve.ini"}) {
    const auto cfg = load_run_config(fs::path(SEMRATE_CONFIG_DIR) / name);
    EXPECT_TRUE(cfg.simulate || cfg.sweep) << name;
  }
  const auto aoi = load_run_config(fs::path(SEMRATE_CONFIG_DIR) / "aoi_load_curve.ini");
  EXPECT_EQ(aoi.sweep->objective, Objective::Aoi);
  EXPECT_DOUBLE_EQ(aoi.curve(10), 0.30);
}

TEST(ConfigTest, MissingFile) {
  EXPECT_THROW(load_run_config("/nonexistent/semrate.ini"), ConfigError);
}

}  // namespace
}  // namespace semrate
