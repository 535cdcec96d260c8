#include "sparselog/kernels.hpp"
#include "sparselog/model.hpp"

namespace sparselog::kernels::serial {

double logistic_risk(const Mat& X, const Vec& y, const Vec& w) {
  const Vec scores = X * w;
  double total = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) total += logistic_loss(y(i) * scores(i));
  return total / static_cast<double>(X.rows());
}

double logistic_risk_grad(const Mat& X, const Vec& y, const Vec& w, Vec& grad) {
  const Eigen::Index n = X.rows();
  const Vec scores = X * w;
  Vec coef(n);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double margin = y(i) * scores(i);
    total += logistic_loss(margin);
    coef(i) = -y(i) * sigmoid(-margin);
  }
  grad.noalias() = X.transpose() * coef;
  grad /= static_cast<double>(n);
  return total / static_cast<double>(n);
}

double soft_risk_grad(const Mat& X, const Vec& soft, const Vec& w, Vec* grad) {
  const Eigen::Index n = X.rows();
  const Vec scores = X * w;
  Vec coef(n);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = scores(i);
    total += soft(i) * logistic_loss(t) + (1.0 - soft(i)) * logistic_loss(-t);
    coef(i) = sigmoid(t) - soft(i);
  }
  if (grad) {
    grad->noalias() = X.transpose() * coef;
    *grad /= static_cast<double>(n);
  }
  return total / static_cast<double>(n);
}

ColMat logistic_hessian(const Mat& X, const Vec& w) {
  const Vec scores = X * w;
  Vec weight(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) weight(i) = sigmoid_prime(scores(i));
  ColMat H = X.transpose() * weight.asDiagonal() * X;
  return H / static_cast<double>(X.rows());
}

}  // namespace sparselog::kernels::serial
