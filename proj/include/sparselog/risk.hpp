#pragma once

#include <optional>
#include <string>

#include "sparselog/model.hpp"
#include "sparselog/types.hpp"

namespace sparselog {

inline constexpr int kDefaultNodes = 64;

// Empirical risks over a dataset (OpenMP kernels, thread-count independent).

double empirical_risk(const Vec& w, const Dataset& data);
Vec empirical_grad(const Vec& w, const Dataset& data);
/// Risk and gradient from a single pass.
double empirical_risk_grad(const Vec& w, const Dataset& data, Vec& grad);

/// Cross entropy against the stored soft labels. Throws if they are absent.
double soft_label_risk(const Vec& w, const Dataset& data);
Vec soft_label_grad(const Vec& w, const Dataset& data);

// Population quantities under x ~ N(0, I), by Gauss-Hermite quadrature after
// reducing to one or two Gaussian directions.

/// E[sigma'(r Z)], Z ~ N(0, 1). Equals 1/4 at r = 0 and decreases in r.
double curvature_at_norm(double r, int nodes = kDefaultNodes);

struct CurvatureScalars {
  double a_of_w = 0.25;  // E[sigma'(x . w)]
  double a_star = 0.0;   // E[sigma'(x . w*)]
  double kappa = 0.0;    // E[sigma'(G)], G ~ N(0, 1)
  int nodes = 0;
};

/// Requires nodes >= 16.
CurvatureScalars curvature_scalars(const Vec& w, const TargetVector& target,
                                   int nodes = kDefaultNodes);

/// E[sigma(S) l(T) + (1 - sigma(S)) l(-T)] where S ~ N(0,1) and
/// T = c S + sqrt(norm2 - c^2) G. This is the population risk of any w with
/// <w, w*> = c and |w|^2 = norm2 for a unit-norm w*.
double population_risk_reduced(double c, double norm2, int nodes = kDefaultNodes);

double population_risk(const Vec& w, const TargetVector& target, int nodes = kDefaultNodes);

/// Population risk at w*, i.e. E[H(sigma(S))] with H the binary entropy in nats.
double bayes_risk(int nodes = kDefaultNodes);

/// population_risk(w) - population_risk(w*). Values in [-1e-10, 0) are
/// clipped to zero; anything more negative throws.
double excess_risk(const Vec& w, const TargetVector& target, int nodes = kDefaultNodes);
/// Same, from the two scalars that determine it.
double excess_risk_reduced(double c, double norm2, int nodes = kDefaultNodes);

/// Closed-form gradient: g_j = w_j a(w) - w*_j a*.
Vec population_grad_stein(const Vec& w, const TargetVector& target, int nodes = kDefaultNodes);

/// Empirical gradient minus population gradient at w.
Vec noise_vector(const Vec& w, const Dataset& data, const TargetVector& target,
                 int nodes = kDefaultNodes);

/// 4 sqrt(log(2d/eta)/n), eta in (0, 1).
double noise_bound_gamma(int n, int d, double eta);

enum class RiskMethod { empirical, soft, population_quadrature, population_montecarlo };

std::string to_string(RiskMethod method);

struct RiskReport {
  double value = 0.0;
  std::optional<Vec> gradient;
  RiskMethod method = RiskMethod::empirical;
  long size = 0;  // samples, quadrature nodes per axis, or Monte Carlo draws
};

}  // namespace sparselog
