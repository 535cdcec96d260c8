#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <doctest.h>

#include "sparselog/io.hpp"
#include "sparselog/sweep.hpp"
#include "sparselog/verify.hpp"

using namespace sparselog;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sparselog_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.d_list = {8, 16};
  c.n = 300;
  c.s = 3;
  c.n_test = 1000;
  c.seeds = {0, 1, 2};
  c.steps = 200;
  return c;
}

}  // namespace

TEST_CASE("config validation") {
  ExperimentConfig c;
  CHECK_NOTHROW(c.validate());
  c.d_list = {20, 10};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.seeds = {1, 1};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.n = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.eta = -1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("log-log slope") {
  CHECK(loglog_slope({1, 2, 4, 8}, {3, 6, 12, 24}) == Approx(1.0).epsilon(1e-14));
  CHECK(loglog_slope({10, 20, 40}, {5, 5, 5}) == Approx(0.0).epsilon(1e-14));
  CHECK_THROWS(loglog_slope({1}, {1}));
  CHECK_THROWS(loglog_slope({1, 2}, {1, -1}));
}

TEST_CASE("dimension sweep writes its files and is reproducible") {
  ExperimentConfig c = small_config();
  c.out_dir = scratch("sweep").string();
  const SweepResult a = run_dimension_sweep(c);
  CHECK(a.rows.size() == 12);
  CHECK(a.summary.size() == 4);
  CHECK(a.slopes.size() == 2);
  for (const auto& r : a.rows) CHECK(r.excess >= 0.0);
  for (const auto& s : a.summary) CHECK(s.count == 3);
  const fs::path dir(c.out_dir);
  CHECK(first_line(dir / "sweep.csv") == "d,seed,algo,excess,stop_time,val_loss");
  CHECK(first_line(dir / "summary.csv") == "d,algo,mean_excess,stderr");
  CHECK(fs::exists(dir / "sweep_testset.csv"));
  const json cfg = read_json(dir / "config.json");
  CHECK(cfg.at("d_list").size() == 2);
  const std::string first = slurp(dir / "sweep.csv");
  c.jobs = 3;
  run_dimension_sweep(c);
  CHECK(slurp(dir / "sweep.csv") == first);
  fs::remove_all(dir);
}

TEST_CASE("training curves share one time axis with the bayes line") {
  ExperimentConfig c = small_config();
  c.d_list = {10};
  c.out_dir = scratch("curves").string();
  const CurvesResult r = run_training_curves(c);
  CHECK(r.trajectories.size() == 2);
  CHECK(r.bayes == Approx(bayes_risk()));
  const fs::path dir(c.out_dir);
  CHECK(first_line(dir / "bayes_risk.csv") == "t,bayes_risk");
  CHECK(first_line(dir / "traj_single_gd.csv") == "t,train_loss,val_loss,norm_S,norm_Sc");
  CHECK(fs::exists(dir / "traj_spindly_gd.csv"));
  fs::remove_all(dir);
}

TEST_CASE("posterior sweep") {
  ExperimentConfig c;
  c.d_list = {3, 6};
  c.n = 200;
  c.seeds = {0, 1};
  c.mcmc_steps = 4000;
  c.burn_in = 1000;
  c.out_dir = scratch("posterior").string();
  const PosteriorSweepResult r = run_posterior_sweep(c);
  CHECK(r.rows.size() == 4);
  CHECK(r.exponents.size() == 1);
  for (const auto& s : r.summary) CHECK(s.mean_excess > 0.0);
  CHECK(first_line(fs::path(c.out_dir) / "posterior.csv") == "d,n,seed,mean_excess,stderr,acceptance");
  fs::remove_all(c.out_dir);
}

TEST_CASE("dataset csv round trip") {
  RngStream r(3);
  const TargetVector t = sample_target(4, 2, TargetProfile::flat, r);
  const Dataset data = sample_dataset(t, 25, r, true);
  const fs::path p = scratch("data.csv");
  write_dataset_csv(p, data);
  CHECK(first_line(p) == "x0,x1,x2,x3,y,soft");
  const Dataset back = read_dataset_csv(p);
  CHECK((back.X.array() == data.X.array()).all());
  CHECK((back.y.array() == data.y.array()).all());
  CHECK((back.soft->array() == data.soft->array()).all());
  fs::remove(p);
  const TargetVector t2 = target_from_metadata(dataset_metadata(t, data));
  CHECK(t2.support() == t.support());
}

TEST_CASE("doubles print with round-trip precision") {
  for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300}) CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("verify configuration errors") {
  VerifyConfig c;
  CHECK_THROWS_AS(run_all(c), std::invalid_argument);
  c.suites = {"nonsense"};
  CHECK_THROWS_AS(run_all(c), std::invalid_argument);
}

TEST_CASE("verify invariants pass and reports are sorted") {
  VerifyConfig c;
  c.suites = {"invariants"};
  const auto reports = run_all(c);
  CHECK(all_passed(reports));
  for (std::size_t k = 1; k < reports.size(); ++k) CHECK(reports[k - 1].name < reports[k].name);
  const json j = to_json(reports);
  CHECK(j.size() == reports.size());
  CHECK(j[0].at("status") == "pass");
}

TEST_CASE("verify baseline passes and a tightened run fails") {
  VerifyConfig c;
  c.suites = {"all"};
  CHECK(all_passed(run_all(c)));
  c.tolerance_scale = 0.01;
  CHECK_FALSE(all_passed(run_all(c)));
}

TEST_CASE("training curves at the reference configuration") {
  ExperimentConfig c;
  c.d_list = {50};
  c.seeds = {0};
  const CurvesResult r = run_training_curves(c);
  const Trajectory& single = r.trajectories[0];
  const Trajectory& spindly = r.trajectories[1];
  const StopSelection& s_single = r.selections[0];
  const StopSelection& s_spindly = r.selections[1];
  CHECK(s_spindly.val_loss < s_single.val_loss);
  CHECK(spindly.norm_Sc[s_spindly.index] < 0.05 * spindly.norm_S[s_spindly.index]);
  // The spindly start is nonzero off the support, so the comparison begins after two steps.
  const std::size_t stop = std::max(s_single.index, s_spindly.index);
  for (std::size_t k = 2; k <= stop; ++k) CHECK(spindly.norm_Sc[k] < single.norm_Sc[k]);
}
