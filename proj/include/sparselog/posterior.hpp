#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparselog/model.hpp"
#include "sparselog/rng.hpp"
#include "sparselog/types.hpp"

namespace sparselog {

/// Gnomonic chart of the unit sphere around a base point:
///   w(z) = (base + B z) / sqrt(1 + |z|^2),
/// where the columns of B are an orthonormal basis of the tangent space
/// {v : <v, base> = 0}. Covers the open hemisphere <w, base> > 0.
class TangentChart {
public:
  explicit TangentChart(const TargetVector& target);
  /// `base` must have unit norm (to 1e-12).
  explicit TangentChart(Vec base);

  int d() const { return static_cast<int>(base_.size()); }
  const Vec& base() const { return base_; }
  const ColMat& basis() const { return basis_; }

  Vec map(const Vec& z) const;
  /// Inverse of map; throws std::domain_error when <w, base> <= 0.
  Vec pullback(const Vec& w) const;

private:
  Vec base_;
  ColMat basis_;  // d x (d - 1)
};

Vec chart_map(const Vec& z, const TangentChart& chart);
Vec chart_pullback(const Vec& w, const TangentChart& chart);
/// Density of the uniform sphere measure in chart coordinates: (1 + |z|^2)^{-d/2}.
double chart_jacobian(const Vec& z, int d);

/// -n L_hat(w(z)) - (d/2) log(1 + |z|^2), unnormalized. An empty dataset
/// (n = 0) leaves only the chart term. Writes the z-gradient when grad != nullptr.
double log_posterior(const Vec& z, const Dataset& data, const TangentChart& chart,
                     Vec* grad = nullptr);

struct SamplerConfig {
  long steps = 20'000;
  long burn_in = 5'000;
  double target_accept = 0.3;
  long thin = 10;
  double initial_step = 0.0;  // 0: 2.38 / sqrt((d - 1)(n/4 + d))
};

struct PosteriorChain {
  std::vector<Vec> z;           // retained states after burn-in
  std::vector<Vec> w;           // their images on the sphere
  std::vector<double> logpost;
  std::vector<int> accepted;    // whether the move into each retained state was accepted
  double acceptance_rate = 0.0; // over the post burn-in steps
  double step = 0.0;            // frozen proposal scale
  long burn_in = 0;
  long steps = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

/// Random-walk Metropolis in chart coordinates, started at z = 0. The log
/// step size follows a Robbins-Monro recursion toward target_accept during
/// burn-in and is frozen afterwards.
PosteriorChain sample_posterior(const Dataset& data, const TangentChart& chart,
                                const SamplerConfig& config, RngStream& rng);

/// Population excess risk of every retained sample.
std::vector<double> chain_excess(const PosteriorChain& chain, const TargetVector& target,
                                 int nodes = 64);

struct PosteriorEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // batch means, 50 batches
  std::size_t samples = 0;
};

/// Batch-means estimate of the mean of `values` (50 batches, fewer when short).
PosteriorEstimate batch_means(const std::vector<double>& values, int batches = 50);
PosteriorEstimate posterior_excess_risk(const PosteriorChain& chain, const TargetVector& target,
                                        int nodes = 64);

struct HessianCheck {
  double kappa_quadrature = 0.0;
  double kappa_hat = 0.0;      // trace / (d - 1) of the estimate
  double trace = 0.0;
  double max_offdiag = 0.0;
  double max_offdiag_se = 0.0; // largest |entry| / its standard error
  double max_diag_dev = 0.0;   // largest |diag - kappa|
  double max_diag_dev_se = 0.0;
  std::uint64_t samples = 0;
};

/// Monte Carlo estimate of B^T E[sigma'(x . w*) x x^T] B in the tangent basis,
/// compared with kappa I.
HessianCheck tangent_hessian_check(const TargetVector& target, int nodes,
                                   std::uint64_t mc_samples, const RngStream& rng);

/// E|x|^k for x ~ N(0, I_d): 2^{k/2} Gamma((d + k)/2) / Gamma(d/2).
double chi_moment(int d, double k);

struct QuadraticCheck {
  double R = 0.0;        // E|x|^3 / (kappa E|x|^2)
  double radius = 0.0;
  double constant = 0.0; // C in excess >= C kappa |z|^2
  double pass_fraction = 0.0;
  double min_ratio = 0.0;  // min excess / (kappa |z|^2) over the trials
  int trials = 0;
};

/// Lower-bound constant for the chart excess risk: (1/3)/(1 + 1/R^2) if R >= 2, else 4/15.
double quadratic_constant(double R);

/// Draws z uniformly from the tangent ball of the given radius (radius <= 0
/// selects min(1/2, 1/R)) and checks excess(w(z)) >= C kappa |z|^2.
QuadraticCheck quadratic_lower_check(const TargetVector& target, int nodes, int trials,
                                     double radius, RngStream& rng);

}  // namespace sparselog
