#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>

#include "twl/cli.hpp"
#include "twl/environment.hpp"
#include "twl/error.hpp"
#include "twl/io.hpp"
#include "twl/walk.hpp"

namespace twl::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("twl_cli_" + std::string(::testing::UnitTest::GetInstance()
                                          ->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
    io::write_file(root_ / "law.txt", "1\t0.25\n-1\t0.75\n");
    io::write_file(root_ / "env.txt", "0.75\t0.75\n0.25\t0.25\n");
    unsetenv("TWL_SEED");
  }
  void TearDown() override { fs::remove_all(root_); }

  std::string path(const std::string& rel) const { return (root_ / rel).string(); }

  int run_spec(const ExperimentSpec& spec) {
    out_.str("");
    err_.str("");
    return run(spec, out_, err_);
  }

  ExperimentSpec walk_spec(const std::string& out) const {
    ExperimentSpec s;
    s.kind = "walk-sim";
    s.law_path = path("law.txt");
    s.m_list = {100};
    s.num_paths = 500;
    s.seed = 11;
    s.out_dir = path(out);
    return s;
  }

  static std::map<std::string, std::string> tree(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
      if (e.is_regular_file())
        files[fs::relative(e.path(), dir).string()] = io::read_file(e.path());
    return files;
  }

  fs::path root_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, TiltInspectReportsDrift) {
  ExperimentSpec s;
  s.kind = "tilt-inspect";
  s.law_path = path("law.txt");
  s.m_list = {100};
  ASSERT_EQ(run_spec(s), 0) << err_.str();
  const auto records = nlohmann::json::parse(out_.str());
  ASSERT_EQ(records.size(), 1u);
  EXPECT_NEAR(records[0]["mean"].get<double>(), -std::log(3.0) / 20.0, 1e-12);
  EXPECT_NEAR(records[0]["mean"].get<double>(), -0.054931, 1e-6);
}

TEST_F(CliTest, ZeroPathsIsValidationError) {
  ExperimentSpec s = walk_spec("zero");
  s.num_paths = 0;
  EXPECT_EQ(run_spec(s), 2);
  const auto rec = nlohmann::json::parse(err_.str());
  EXPECT_EQ(rec["error"], "InvalidArgument");
  EXPECT_EQ(rec["status"], "error");
  EXPECT_TRUE(fs::exists(root_ / "zero" / "error.json"));
}

TEST_F(CliTest, NegativeMassRecordCarriesHint) {
  io::write_file(root_ / "thin.txt", "0.1\t0.5\n-3\t0.5\n");
  ExperimentSpec s;
  s.kind = "tilt-inspect";
  s.law_path = path("thin.txt");
  s.m_list = {1};
  EXPECT_EQ(run_spec(s), 2);
  const auto rec = nlohmann::json::parse(err_.str());
  EXPECT_EQ(rec["error"], "NegativeMass");
  EXPECT_EQ(rec["m_min"], 2);
}

TEST_F(CliTest, SpecValidation) {
  ExperimentSpec s = walk_spec("v");
  s.m_list = {100, 400};
  EXPECT_EQ(run_spec(s), 2);
  s.kind = "tilt-inspect";
  s.m_list = {400, 100};
  EXPECT_EQ(run_spec(s), 2);
  s = walk_spec("v");
  s.seed.reset();
  EXPECT_EQ(run_spec(s), 2);
  s.kind = "bogus";
  EXPECT_EQ(run_spec(s), 2);
  EXPECT_THROW(parse_m_list("4,x"), Error);
  EXPECT_EQ(parse_m_list("4,100"), (std::vector<std::uint64_t>{4, 100}));
}

TEST_F(CliTest, SpecJsonRoundTrip) {
  const ExperimentSpec s = walk_spec("x");
  const ExperimentSpec back = spec_from_json(to_json(s));
  EXPECT_EQ(to_json(back), to_json(s));
  EXPECT_THROW(spec_from_json(nlohmann::json{{"kind", "walk-sim"}, {"oops", 1}}), Error);
}

TEST_F(CliTest, WalkSimIsByteReproducible) {
  ExperimentSpec a = walk_spec("a");
  ExperimentSpec b = walk_spec("b");
  a.workers = 1;
  b.workers = 3;
  ASSERT_EQ(run_spec(a), 0) << err_.str();
  ASSERT_EQ(run_spec(b), 0) << err_.str();
  const auto ta = tree(root_ / "a");
  EXPECT_EQ(ta, tree(root_ / "b"));
  EXPECT_TRUE(ta.contains("spec.json"));
  EXPECT_TRUE(ta.contains("reports/marginal_ks.json"));

  const auto paths = walk::ensemble_from_csv(ta.at("paths/walk.csv"));
  EXPECT_EQ(paths.size(), 20u);
  const auto ends = walk::samples_from_csv(ta.at("paths/marginal.csv"));
  ASSERT_EQ(ends.size(), 500u);
  EXPECT_EQ(paths[3].values.back(), ends[3]);
}

TEST_F(CliTest, SeedFallsBackToEnvironment) {
  ExperimentSpec a = walk_spec("explicit");
  ASSERT_EQ(run_spec(a), 0);
  ExperimentSpec b = walk_spec("fallback");
  b.seed.reset();
  setenv("TWL_SEED", "11", 1);
  ASSERT_EQ(run_spec(b), 0) << err_.str();
  EXPECT_EQ(tree(root_ / "explicit"), tree(root_ / "fallback"));
  setenv("TWL_SEED", "eleven", 1);
  EXPECT_EQ(run_spec(b), 2);
}

TEST_F(CliTest, RwreSimArtifactsRoundTrip) {
  for (const char* mode : {"annealed", "quenched"}) {
    ExperimentSpec s;
    s.kind = "rwre-sim";
    s.env_path = path("env.txt");
    s.m_list = {10};
    s.num_paths = 200;
    s.seed = 5;
    s.mode = mode;
    s.out_dir = path(mode);
    ASSERT_EQ(run_spec(s), 0) << err_.str();
    const auto t = tree(root_ / mode);
    EXPECT_EQ(walk::ensemble_from_csv(t.at("paths/rwre.csv")).size(), 20u);
    EXPECT_EQ(walk::samples_from_csv(t.at("paths/marginal.csv")).size(), 200u);
    const env::EnvironmentSlice slice = env::slice_from_csv(t.at("paths/environment.csv"), 10);
    const walk::PathGrid v = walk::path_from_csv(t.at("paths/potential.csv"));
    EXPECT_EQ(v.values.back(), env::potential_at(slice, v.horizon()));
    const auto report = nlohmann::json::parse(t.at("reports/environment.json"));
    EXPECT_NEAR(report["kappa"].get<double>(), 1.0, 1e-12);
  }
}

TEST_F(CliTest, DiffusionSimArtifacts) {
  ExperimentSpec s;
  s.kind = "diffusion-sim";
  s.sigma = std::log(3.0);
  s.kappa = 1.0;
  s.num_paths = 100;
  s.seed = 2;
  s.out_dir = path("d");
  ASSERT_EQ(run_spec(s), 0) << err_.str();
  const auto t = tree(root_ / "d");
  const auto paths = walk::ensemble_from_csv(t.at("paths/diffusion.csv"));
  ASSERT_EQ(paths.size(), 20u);
  EXPECT_EQ(paths[0].values.size(), 401u);
  s.mesh_h = 0.5;
  EXPECT_EQ(run_spec(s), 2);
}

}  // namespace
}  // namespace twl::cli
