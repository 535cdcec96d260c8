#pragma once

#include <vector>

namespace sparselog {

/// Gauss-Hermite rule rescaled for a standard normal variable:
/// E[f(Z)] ~= sum_k weights[k] * f(nodes[k]), Z ~ N(0, 1).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int size() const { return static_cast<int>(nodes.size()); }
};

/// Cached, immutable rule with `n` nodes (n >= 1). Thread-safe.
const GaussHermiteRule& gauss_hermite_normal(int n);

}  // namespace sparselog
