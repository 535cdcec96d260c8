#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparselog/trainers.hpp"

namespace sparselog {

struct ExperimentConfig {
  std::vector<int> d_list{10, 20, 40, 80};
  int s = 5;
  int n = 1000;
  std::vector<int> n_list;  // posterior sweep only; empty means {n}
  int n_test = 10'000;      // validation set for early stopping, and the held-out test set
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<Algo> algos{Algo::single_gd, Algo::spindly_gd};
  double eta = 1.0;         // learning rate (descent) or integrator step (flows)
  long steps = 2000;
  double alpha = 0.0;       // spindly init scale; 0 means 1/sqrt(d)
  int nodes = 64;
  long val_stride = 5;      // steps between validation evaluations
  long mcmc_steps = 20'000;
  long burn_in = 5'000;
  double target_accept = 0.3;
  long thin = 10;
  int jobs = 1;
  bool coordinates = false; // coordinate columns in trajectory files
  std::string out_dir;      // empty: nothing written

  /// Throws std::invalid_argument on nonpositive sizes, an unsorted d-list or repeated seeds.
  void validate() const;
};

struct CurvesResult {
  std::vector<Trajectory> trajectories;  // one per algorithm
  std::vector<StopSelection> selections;
  double bayes = 0.0;
};

/// Training curves at d = d_list.front() and seed = seeds.front(). Writes
/// traj_<algo>.csv, bayes_risk.csv (t,bayes_risk), and config.json.
CurvesResult run_training_curves(const ExperimentConfig& cfg);

struct SweepRow {
  int d = 0;
  std::uint64_t seed = 0;
  Algo algo = Algo::single_gd;
  double excess = 0.0;      // population excess risk at the early-stopped iterate
  double stop_time = 0.0;
  double val_loss = 0.0;
  double test_excess = 0.0; // held-out loss minus Bayes risk
  double norm_Sc = 0.0;
};

struct SummaryRow {
  int d = 0;
  Algo algo = Algo::single_gd;
  double mean_excess = 0.0;
  double stderr_excess = 0.0;
  int count = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;        // ordered by (d, seed, algo) as configured
  std::vector<SummaryRow> summary;   // ordered by (d, algo)
  /// Log-log slope of mean excess against d, per algorithm (same order as cfg.algos).
  std::vector<double> slopes;
};

/// Early-stopped excess risk over the (d, seed, algo) grid. Cells run on
/// `jobs` threads; results do not depend on the thread count. Writes
/// sweep.csv, summary.csv, sweep_testset.csv and config.json.
SweepResult run_dimension_sweep(const ExperimentConfig& cfg);

struct PosteriorRow {
  int d = 0;
  int n = 0;
  std::uint64_t seed = 0;
  double mean_excess = 0.0;
  double std_error = 0.0;
  double acceptance = 0.0;
};

struct PosteriorSummary {
  int d = 0;
  int n = 0;
  double mean_excess = 0.0;
  double stderr_excess = 0.0;  // across seeds
};

struct PosteriorSweepResult {
  std::vector<PosteriorRow> rows;
  std::vector<PosteriorSummary> summary;
  /// Log-log slope of mean excess against d - 1, per n (same order as the n list).
  std::vector<double> exponents;
};

/// Spherical posterior excess risk over (n, d, seed). Sparsity is capped at
/// d - 1. Writes posterior.csv, posterior_summary.csv and config.json.
PosteriorSweepResult run_posterior_sweep(const ExperimentConfig& cfg);

/// Least-squares slope of log(y) on log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace sparselog
