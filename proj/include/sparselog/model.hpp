#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sparselog/rng.hpp"
#include "sparselog/types.hpp"

namespace sparselog {

/// Logistic link, evaluated on the branch that never overflows.
inline double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

/// sigma'(t) = sigma(t) sigma(-t).
inline double sigmoid_prime(double t) {
  const double e = std::exp(-std::abs(t));
  const double q = 1.0 + e;
  return e / (q * q);
}

/// l(t) = log(1 + exp(-t)).
inline double logistic_loss(double t) {
  if (t >= 0.0) return std::log1p(std::exp(-t));
  return -t + std::log1p(std::exp(t));
}

/// s-sparse, unit-norm target with strictly positive values on its support.
class TargetVector {
public:
  /// Validates: support sorted and unique, 1 <= s < d, values > 0, unit norm to 1e-12.
  static TargetVector from_values(int d, std::vector<int> support, std::vector<double> values);

  int d() const { return d_; }
  int s() const { return static_cast<int>(support_.size()); }
  const std::vector<int>& support() const { return support_; }
  const std::vector<double>& values() const { return values_; }
  double w_min() const { return w_min_; }
  /// Index (into the ambient space) of the smallest support value; ties go to the first.
  int i_min() const { return i_min_; }
  bool in_support(int j) const;
  Vec dense() const;

private:
  TargetVector() = default;

  int d_ = 0;
  std::vector<int> support_;
  std::vector<double> values_;
  double w_min_ = 0.0;
  int i_min_ = -1;
};

enum class TargetProfile { flat, custom };

TargetVector sample_target(int d, int s, TargetProfile profile, RngStream& rng,
                           std::span<const double> custom_values = {});

struct Dataset {
  Mat X;
  Vec y;
  std::uint64_t seed = 0;
  std::optional<Vec> soft;

  int n() const { return static_cast<int>(X.rows()); }
  int d() const { return static_cast<int>(X.cols()); }
};

/// Rows i.i.d. N(0, I); y_i = +1 with probability sigma(x_i . w*).
Dataset sample_dataset(const TargetVector& target, int n, RngStream& rng, bool with_soft);

enum class Separability { separable, not_separable, undecided };

struct SeparabilityOptions {
  int perceptron_epochs = 200;
  long max_lp_pivots = 2'000'000;
};

/// Decides whether some w has y_i x_i . w > 0 for every i.
/// A perceptron pass certifies separable data quickly; otherwise the
/// alternative system (lambda >= 0, sum lambda = 1, sum lambda_i y_i x_i = 0)
/// is solved exactly by a phase-one simplex, whose feasibility certifies
/// non-separability.
Separability linear_separability(const Dataset& data, const SeparabilityOptions& options = {});

/// Throws std::runtime_error if both stages hit their caps.
bool is_linearly_separable(const Dataset& data, const SeparabilityOptions& options = {});

}  // namespace sparselog
