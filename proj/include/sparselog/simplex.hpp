#pragma once

#include "sparselog/types.hpp"

namespace sparselog {

enum class LpStatus { feasible, infeasible, pivot_limit };

struct PhaseOneResult {
  LpStatus status = LpStatus::pivot_limit;
  Vec x;                   // a feasible point when status == feasible
  double infeasibility = 0.0;
  long pivots = 0;
};

/// Phase-one dense simplex for {x >= 0 : A x = b}. Rows with negative b are
/// flipped internally. Dantzig pricing with a switch to Bland's rule after a
/// run of degenerate pivots, so the method terminates.
PhaseOneResult phase_one_simplex(const ColMat& A, const Vec& b, long max_pivots = 1'000'000,
                                 double tol = 1e-9);

}  // namespace sparselog
