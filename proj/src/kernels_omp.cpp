#include <cstdint>
#include <vector>

#include "sparselog/kernels.hpp"
#include "sparselog/model.hpp"

namespace sparselog::kernels::parallel {

namespace {

Eigen::Index chunk_count(Eigen::Index n) { return (n + kChunkRows - 1) / kChunkRows; }

// Per-chunk partial loss and gradient contributions, combined in chunk order.
template <class RowTerm>
double chunked_reduce(const Mat& X, const Vec& w, Vec* grad, RowTerm&& term) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  const Eigen::Index chunks = chunk_count(n);
  std::vector<double> loss(chunks, 0.0);
  ColMat partial_grad;
  if (grad) partial_grad = ColMat::Zero(d, chunks);

#pragma omp parallel for schedule(static)
  for (std::int64_t ci = 0; ci < static_cast<std::int64_t>(chunks); ++ci) {
    const Eigen::Index c = static_cast<Eigen::Index>(ci);
    const Eigen::Index begin = c * kChunkRows;
    const Eigen::Index end = std::min(n, begin + kChunkRows);
    double acc = 0.0;
    for (Eigen::Index i = begin; i < end; ++i) {
      const double score = X.row(i).dot(w);
      double coef = 0.0;
      acc += term(i, score, coef);
      if (grad) partial_grad.col(c) += coef * X.row(i).transpose();
    }
    loss[static_cast<std::size_t>(c)] = acc;
  }

  double total = 0.0;
  for (double v : loss) total += v;
  if (grad) {
    grad->setZero(d);
    for (Eigen::Index c = 0; c < chunks; ++c) *grad += partial_grad.col(c);
    *grad /= static_cast<double>(n);
  }
  return total / static_cast<double>(n);
}

}  // namespace

double logistic_risk(const Mat& X, const Vec& y, const Vec& w) {
  return chunked_reduce(X, w, nullptr, [&](Eigen::Index i, double score, double&) {
    return logistic_loss(y(i) * score);
  });
}

double logistic_risk_grad(const Mat& X, const Vec& y, const Vec& w, Vec& grad) {
  return chunked_reduce(X, w, &grad, [&](Eigen::Index i, double score, double& coef) {
    const double margin = y(i) * score;
    coef = -y(i) * sigmoid(-margin);
    return logistic_loss(margin);
  });
}

double soft_risk_grad(const Mat& X, const Vec& soft, const Vec& w, Vec* grad) {
  return chunked_reduce(X, w, grad, [&](Eigen::Index i, double t, double& coef) {
    coef = sigmoid(t) - soft(i);
    return soft(i) * logistic_loss(t) + (1.0 - soft(i)) * logistic_loss(-t);
  });
}

ColMat logistic_hessian(const Mat& X, const Vec& w) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  const Eigen::Index chunks = chunk_count(n);
  std::vector<ColMat> partial(static_cast<std::size_t>(chunks), ColMat::Zero(d, d));
#pragma omp parallel for schedule(static)
  for (std::int64_t ci = 0; ci < static_cast<std::int64_t>(chunks); ++ci) {
    const Eigen::Index begin = static_cast<Eigen::Index>(ci) * kChunkRows;
    const Eigen::Index end = std::min(n, begin + kChunkRows);
    ColMat& H = partial[static_cast<std::size_t>(ci)];
    for (Eigen::Index i = begin; i < end; ++i) {
      const double weight = sigmoid_prime(X.row(i).dot(w));
      H.selfadjointView<Eigen::Lower>().rankUpdate(X.row(i).transpose(), weight);
    }
  }
  ColMat H = ColMat::Zero(d, d);
  for (const auto& P : partial) H += P;
  H.triangularView<Eigen::StrictlyUpper>() = H.transpose();
  return H / static_cast<double>(n);
}

}  // namespace sparselog::kernels::parallel
