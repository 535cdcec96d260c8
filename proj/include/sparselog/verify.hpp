#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparselog/rng.hpp"

namespace sparselog {

struct OracleReport {
  std::string name;
  bool pass = false;
  double discrepancy = 0.0;
  double tolerance = 0.0;
  std::string resources;  // sample sizes, trials, iterations
  std::string detail;
  double seconds = 0.0;
};

/// Closed-form population gradient against a Monte Carlo estimate of
/// E[x_j (sigma(x . w) - sigma(x . w*))] at `points` random w, sharing one set
/// of draws. The estimator subtracts the linear control variate
/// x_j (x . (w - w*)) / 4 and adds back its exact mean. Discrepancy is the
/// largest coordinate-wise relative error. Test points are redrawn until
/// every |g_j| >= 0.05 so that relative errors are meaningful.
OracleReport check_stein_identity(int d, int s, std::uint64_t mc_samples, const RngStream& rng,
                                  double tol = 1e-2, int points = 5);

/// Newton on the soft and hard empirical risks over `seeds` independent
/// problems. Passes when every soft minimizer is within `soft_tol` of w*, the
/// hard minimizer is farther than `hard_gap` in at least `hard_fraction` of
/// runs, and the hard gradient at w* is nonzero in every run. Separable draws
/// are redrawn and counted.
OracleReport check_soft_vs_hard_minimizers(int d, int s, int n, int seeds, const RngStream& rng,
                                           double soft_tol = 1e-8, double hard_gap = 1e-3,
                                           double hard_fraction = 0.95);

/// Spectrum of H_T = (1/n) sum P_T sigma'(y_i x_i . w*) x_i x_i^T P_T against kappa
/// over `trials` datasets. Reports c_hat, the 95th percentile of
/// max|lambda/kappa - 1| / sqrt((d + log(1/0.05))/n). Passes when |H_T w*| < annihilation_tol
/// in every trial.
OracleReport check_hessian_concentration(int d, int n, int trials, const RngStream& rng,
                                         double annihilation_tol = 1e-10);

/// Largest relative spectral deviation max|lambda/kappa - 1| of a single large-n H_T.
OracleReport check_hessian_large_n(int d, int n, const RngStream& rng, double tol = 0.02);

/// max_j |zeta_j(w*)| <= gamma(n, d, eta) in at least `coverage` of `trials` fresh datasets.
OracleReport check_noise_coverage(int n, int d, double eta, int trials, const RngStream& rng,
                                  double coverage = 0.95);

struct VerifyConfig {
  std::vector<std::string> suites;  // any of: stein, minimizers, hessian, coverage, invariants, all
  std::uint64_t seed = 7;
  double tolerance_scale = 1.0;     // multiplies every tolerance
  std::uint64_t stein_samples = 10'000'000;
  int minimizer_seeds = 20;
  int hessian_trials = 100;
  int coverage_trials = 500;
};

std::vector<std::string> known_suites();

/// Runs the selected suites; reports are sorted by name. Throws
/// std::invalid_argument when no suite is selected or a name is unknown.
std::vector<OracleReport> run_all(const VerifyConfig& config);

bool all_passed(const std::vector<OracleReport>& reports);

}  // namespace sparselog
