#pragma once

#include "sparselog/model.hpp"
#include "sparselog/types.hpp"

namespace sparselog {

struct NewtonOptions {
  double grad_tol = 1e-12;
  int max_iter = 100;
  double rank_tol = 1e-10;  // smallest eigenvalue of X^T X / n accepted as full rank
};

struct NewtonResult {
  Vec w;
  int iterations = 0;
  double grad_norm = 0.0;
  double loss = 0.0;
  bool converged = false;
};

/// Smallest eigenvalue of X^T X / n.
double design_min_eigenvalue(const Dataset& data);

/// Damped Newton from w = 0 on the hard-label empirical risk. Throws
/// std::runtime_error when the design is rank deficient; on separable data
/// the iterates run off to infinity and the result reports no convergence.
NewtonResult newton_hard(const Dataset& data, const NewtonOptions& options = {});
/// Same on the soft-label risk (requires soft labels).
NewtonResult newton_soft(const Dataset& data, const NewtonOptions& options = {});

}  // namespace sparselog
