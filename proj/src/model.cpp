#include "sparselog/model.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "sparselog/simplex.hpp"

namespace sparselog {

TargetVector TargetVector::from_values(int d, std::vector<int> support, std::vector<double> values) {
  const int s = static_cast<int>(support.size());
  if (s < 1 || s >= d)
    throw std::invalid_argument("target sparsity must satisfy 1 <= s < d (s=" + std::to_string(s) +
                                ", d=" + std::to_string(d) + ")");
  if (values.size() != support.size())
    throw std::invalid_argument("target support and values differ in length");
  for (int k = 0; k < s; ++k) {
    if (support[k] < 0 || support[k] >= d) throw std::invalid_argument("support index out of range");
    if (k > 0 && support[k] <= support[k - 1])
      throw std::invalid_argument("support must be strictly increasing");
    if (!(values[k] > 0.0)) throw std::invalid_argument("target values must be strictly positive");
  }
  double sq = 0.0;
  for (double v : values) sq += v * v;
  if (std::abs(std::sqrt(sq) - 1.0) > 1e-12) throw std::invalid_argument("target must have unit norm");

  TargetVector t;
  t.d_ = d;
  t.support_ = std::move(support);
  t.values_ = std::move(values);
  const auto it = std::min_element(t.values_.begin(), t.values_.end());
  t.w_min_ = *it;
  t.i_min_ = t.support_[static_cast<std::size_t>(it - t.values_.begin())];
  return t;
}

bool TargetVector::in_support(int j) const {
  return std::binary_search(support_.begin(), support_.end(), j);
}

Vec TargetVector::dense() const {
  Vec w = Vec::Zero(d_);
  for (std::size_t k = 0; k < support_.size(); ++k) w(support_[k]) = values_[k];
  return w;
}

TargetVector sample_target(int d, int s, TargetProfile profile, RngStream& rng,
                           std::span<const double> custom_values) {
  if (s < 1 || s >= d)
    throw std::invalid_argument("sample_target requires 1 <= s < d");

  // Partial Fisher-Yates: first s entries are a uniform s-subset.
  std::vector<int> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  for (int k = 0; k < s; ++k) {
    const auto j = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(d - k)));
    std::swap(perm[k], perm[j]);
  }
  std::vector<int> support(perm.begin(), perm.begin() + s);
  std::sort(support.begin(), support.end());

  std::vector<double> values(s);
  if (profile == TargetProfile::flat) {
    std::fill(values.begin(), values.end(), 1.0 / std::sqrt(static_cast<double>(s)));
  } else {
    if (static_cast<int>(custom_values.size()) != s)
      throw std::invalid_argument("custom profile needs exactly s values");
    double sq = 0.0;
    for (double v : custom_values) {
      if (!(v > 0.0)) throw std::invalid_argument("custom target values must be positive");
      sq += v * v;
    }
    const double norm = std::sqrt(sq);
    for (int k = 0; k < s; ++k) values[k] = custom_values[k] / norm;
    // Renormalising once more removes the last ulp of drift.
    double sq2 = 0.0;
    for (double v : values) sq2 += v * v;
    for (double& v : values) v /= std::sqrt(sq2);
  }
  return TargetVector::from_values(d, std::move(support), std::move(values));
}

Dataset sample_dataset(const TargetVector& target, int n, RngStream& rng, bool with_soft) {
  if (n < 1) throw std::invalid_argument("sample_dataset requires n >= 1");
  const int d = target.d();
  Dataset data;
  data.seed = rng.seed();
  data.X.resize(n, d);
  data.y.resize(n);
  Vec soft(n);
  const auto& support = target.support();
  const auto& values = target.values();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) data.X(i, j) = rng.normal();
    double score = 0.0;
    for (std::size_t k = 0; k < support.size(); ++k) score += data.X(i, support[k]) * values[k];
    const double p = sigmoid(score);
    soft(i) = p;
    data.y(i) = rng.uniform() < p ? 1.0 : -1.0;
  }
  if (with_soft) data.soft = std::move(soft);
  return data;
}

namespace {

// Returns true when a strictly separating w was found.
bool perceptron_separates(const Mat& A, int epochs) {
  const Eigen::Index n = A.rows();
  Vec w = Vec::Zero(A.cols());
  for (int epoch = 0; epoch < epochs; ++epoch) {
    bool clean = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (A.row(i).dot(w) <= 0.0) {
        w += A.row(i).transpose();
        clean = false;
      }
    }
    if (clean) return true;
  }
  return false;
}

}  // namespace

Separability linear_separability(const Dataset& data, const SeparabilityOptions& options) {
  if (data.n() < 1) throw std::invalid_argument("separability needs at least one sample");
  const int n = data.n();
  const int d = data.d();

  // a_i = y_i x_i, normalised; feasibility is invariant under positive column scaling.
  Mat A(n, d);
  for (int i = 0; i < n; ++i) {
    A.row(i) = data.y(i) * data.X.row(i);
    const double norm = A.row(i).norm();
    if (norm == 0.0) return Separability::not_separable;  // x_i = 0 can never satisfy a strict margin
    A.row(i) /= norm;
  }
  if (perceptron_separates(A, options.perceptron_epochs)) return Separability::separable;

  // Gordan alternative: exactly one of {A w > 0} and {lambda >= 0, lambda != 0, A^T lambda = 0} holds.
  ColMat lp(d + 1, n);
  lp.topRows(d) = A.transpose();
  lp.row(d).setOnes();
  Vec rhs = Vec::Zero(d + 1);
  rhs(d) = 1.0;
  const auto res = phase_one_simplex(lp, rhs, options.max_lp_pivots);
  switch (res.status) {
    case LpStatus::feasible: return Separability::not_separable;
    case LpStatus::infeasible: return Separability::separable;
    case LpStatus::pivot_limit: return Separability::undecided;
  }
  return Separability::undecided;
}

bool is_linearly_separable(const Dataset& data, const SeparabilityOptions& options) {
  const auto verdict = linear_separability(data, options);
  if (verdict == Separability::undecided)
    throw std::runtime_error("separability undecided: perceptron and simplex both hit their caps");
  return verdict == Separability::separable;
}

}  // namespace sparselog
