#include "sparselog/simplex.hpp"

#include <limits>
#include <vector>

namespace sparselog {

PhaseOneResult phase_one_simplex(const ColMat& A, const Vec& b_in, long max_pivots, double tol) {
  const Eigen::Index m = A.rows();
  const Eigen::Index nvar = A.cols();
  const Eigen::Index ncol = nvar + m;  // original + artificial

  // Tableau rows: constraint rows 0..m-1, last column is the right-hand side.
  Mat T = Mat::Zero(m, ncol + 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sign = b_in(i) < 0 ? -1.0 : 1.0;
    T.row(i).head(nvar) = sign * A.row(i);
    T(i, nvar + i) = 1.0;
    T(i, ncol) = sign * b_in(i);
  }
  std::vector<Eigen::Index> basis(m);
  for (Eigen::Index i = 0; i < m; ++i) basis[i] = nvar + i;

  // Reduced costs of minimising the sum of artificials.
  Eigen::RowVectorXd cost = Eigen::RowVectorXd::Zero(ncol + 1);
  for (Eigen::Index i = 0; i < m; ++i) cost -= T.row(i);
  for (Eigen::Index i = 0; i < m; ++i) cost(nvar + i) = 0.0;

  PhaseOneResult result;
  int degenerate_run = 0;
  bool bland = false;
  while (result.pivots < max_pivots) {
    Eigen::Index enter = -1;
    if (bland) {
      for (Eigen::Index j = 0; j < ncol; ++j)
        if (cost(j) < -tol) { enter = j; break; }
    } else {
      double best = -tol;
      for (Eigen::Index j = 0; j < ncol; ++j)
        if (cost(j) < best) { best = cost(j); enter = j; }
    }
    if (enter < 0) break;

    Eigen::Index leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      const double a = T(i, enter);
      if (a > tol) {
        const double ratio = T(i, ncol) / a;
        if (ratio < best_ratio - 1e-12 ||
            (ratio <= best_ratio + 1e-12 && leave >= 0 && basis[i] < basis[leave])) {
          best_ratio = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) break;  // unbounded direction cannot occur in phase one

    degenerate_run = best_ratio <= tol ? degenerate_run + 1 : 0;
    if (degenerate_run > 50) bland = true;

    const double pivot = T(leave, enter);
    T.row(leave) /= pivot;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (i == leave) continue;
      const double f = T(i, enter);
      if (f != 0.0) T.row(i) -= f * T.row(leave);
    }
    const double fc = cost(enter);
    if (fc != 0.0) cost -= fc * T.row(leave);
    basis[leave] = enter;
    ++result.pivots;
  }

  result.infeasibility = 0.0;
  result.x = Vec::Zero(nvar);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (basis[i] >= nvar)
      result.infeasibility += std::max(0.0, T(i, ncol));
    else
      result.x(basis[i]) = T(i, ncol);
  }
  if (result.pivots >= max_pivots)
    result.status = LpStatus::pivot_limit;
  else
    result.status = result.infeasibility <= 1e3 * tol ? LpStatus::feasible : LpStatus::infeasible;
  return result;
}

}  // namespace sparselog
