#include "sparselog/newton.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "sparselog/kernels.hpp"
#include "sparselog/risk.hpp"

namespace sparselog {

double design_min_eigenvalue(const Dataset& data) {
  const ColMat G = data.X.transpose() * data.X / static_cast<double>(data.n());
  Eigen::SelfAdjointEigenSolver<ColMat> eig(G, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

namespace {

using ValueGrad = std::function<double(const Vec&, Vec&)>;

NewtonResult newton(const Dataset& data, const ValueGrad& vg, const NewtonOptions& opt) {
  if (design_min_eigenvalue(data) <= opt.rank_tol)
    throw std::runtime_error("design matrix is rank deficient; the minimizer is not unique");
  const int d = data.d();
  NewtonResult r;
  r.w = Vec::Zero(d);
  Vec g(d), g_trial(d);
  double f = vg(r.w, g);
  double lambda = 0.0;
  for (r.iterations = 0; r.iterations < opt.max_iter; ++r.iterations) {
    r.grad_norm = g.norm();
    if (r.grad_norm < opt.grad_tol) break;
    ColMat H = kernels::parallel::logistic_hessian(data.X, r.w);
    H.diagonal().array() += lambda;
    Eigen::LLT<ColMat> llt(H);
    if (llt.info() != Eigen::Success) {
      lambda = std::max(2.0 * lambda, 1e-8);
      continue;
    }
    const Vec p = -llt.solve(g);
    const double slope = g.dot(p);
    double step = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Vec trial = r.w + step * p;
      const double f_trial = vg(trial, g_trial);
      // Near the optimum f stops resolving the decrease; fall back to the gradient norm.
      if (f_trial <= f + 1e-4 * step * slope || g_trial.norm() < r.grad_norm * (1.0 - 1e-4 * step)) {
        r.w = trial;
        f = f_trial;
        g = g_trial;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (lambda > 1e6) break;
      lambda = std::max(10.0 * lambda, 1e-6);
    } else {
      lambda *= 0.1;
      if (lambda < 1e-12) lambda = 0.0;
    }
    if (!(r.w.norm() < 1e6)) break;
  }
  r.grad_norm = g.norm();
  r.loss = f;
  r.converged = r.grad_norm < opt.grad_tol;
  return r;
}

}  // namespace

NewtonResult newton_hard(const Dataset& data, const NewtonOptions& options) {
  return newton(data, [&](const Vec& w, Vec& g) { return empirical_risk_grad(w, data, g); },
                options);
}

NewtonResult newton_soft(const Dataset& data, const NewtonOptions& options) {
  if (!data.soft) throw std::invalid_argument("dataset has no soft labels");
  return newton(data,
                [&](const Vec& w, Vec& g) {
                  return kernels::parallel::soft_risk_grad(data.X, *data.soft, w, &g);
                },
                options);
}

}  // namespace sparselog
