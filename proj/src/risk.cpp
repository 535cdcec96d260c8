#include "sparselog/risk.hpp"

#include <cmath>
#include <stdexcept>

#include "sparselog/kernels.hpp"
#include "sparselog/quadrature.hpp"

namespace sparselog {

namespace {

void check_dims(const Vec& w, const Dataset& data) {
  if (w.size() != data.X.cols()) throw std::invalid_argument("weight and data dimensions differ");
}

void check_nodes(int nodes) {
  if (nodes < 16) throw std::invalid_argument("quadrature needs at least 16 nodes");
}

const Vec& soft_labels(const Dataset& data) {
  if (!data.soft) throw std::invalid_argument("dataset has no soft labels");
  return *data.soft;
}

}  // namespace

double empirical_risk(const Vec& w, const Dataset& data) {
  check_dims(w, data);
  return kernels::parallel::logistic_risk(data.X, data.y, w);
}

Vec empirical_grad(const Vec& w, const Dataset& data) {
  Vec g;
  empirical_risk_grad(w, data, g);
  return g;
}

double empirical_risk_grad(const Vec& w, const Dataset& data, Vec& grad) {
  check_dims(w, data);
  return kernels::parallel::logistic_risk_grad(data.X, data.y, w, grad);
}

double soft_label_risk(const Vec& w, const Dataset& data) {
  check_dims(w, data);
  return kernels::parallel::soft_risk_grad(data.X, soft_labels(data), w, nullptr);
}

Vec soft_label_grad(const Vec& w, const Dataset& data) {
  check_dims(w, data);
  Vec g;
  kernels::parallel::soft_risk_grad(data.X, soft_labels(data), w, &g);
  return g;
}

double curvature_at_norm(double r, int nodes) {
  check_nodes(nodes);
  const auto& rule = gauss_hermite_normal(nodes);
  double acc = 0.0;
  for (int k = 0; k < rule.size(); ++k) acc += rule.weights[k] * sigmoid_prime(r * rule.nodes[k]);
  return acc;
}

CurvatureScalars curvature_scalars(const Vec& w, const TargetVector& target, int nodes) {
  if (w.size() != target.d()) throw std::invalid_argument("weight and target dimensions differ");
  CurvatureScalars out;
  out.nodes = nodes;
  out.a_of_w = w.norm() == 0.0 ? 0.25 : curvature_at_norm(w.norm(), nodes);
  out.kappa = curvature_at_norm(1.0, nodes);
  // The target has unit norm, so a* coincides with kappa.
  out.a_star = out.kappa;
  return out;
}

double population_risk_reduced(double c, double norm2, int nodes) {
  check_nodes(nodes);
  const auto& rule = gauss_hermite_normal(nodes);
  const double r = std::sqrt(std::max(0.0, norm2 - c * c));
  double total = 0.0;
  for (int a = 0; a < rule.size(); ++a) {
    const double s = rule.nodes[a];
    const double p = sigmoid(s);
    double inner = 0.0;
    if (r == 0.0) {
      const double t = c * s;
      inner = p * logistic_loss(t) + (1.0 - p) * logistic_loss(-t);
    } else {
      for (int b = 0; b < rule.size(); ++b) {
        const double t = c * s + r * rule.nodes[b];
        inner += rule.weights[b] * (p * logistic_loss(t) + (1.0 - p) * logistic_loss(-t));
      }
    }
    total += rule.weights[a] * inner;
  }
  return total;
}

double population_risk(const Vec& w, const TargetVector& target, int nodes) {
  if (w.size() != target.d()) throw std::invalid_argument("weight and target dimensions differ");
  double c = 0.0;
  for (int k = 0; k < target.s(); ++k) c += w(target.support()[k]) * target.values()[k];
  return population_risk_reduced(c, w.squaredNorm(), nodes);
}

double bayes_risk(int nodes) { return population_risk_reduced(1.0, 1.0, nodes); }

double excess_risk_reduced(double c, double norm2, int nodes) {
  const double gap = population_risk_reduced(c, norm2, nodes) - bayes_risk(nodes);
  if (gap >= 0.0) return gap;
  if (gap >= -1e-10) return 0.0;
  throw std::runtime_error("negative excess risk " + std::to_string(gap) +
                           "; quadrature is too coarse for this point");
}

double excess_risk(const Vec& w, const TargetVector& target, int nodes) {
  if (w.size() != target.d()) throw std::invalid_argument("weight and target dimensions differ");
  double c = 0.0;
  for (int k = 0; k < target.s(); ++k) c += w(target.support()[k]) * target.values()[k];
  return excess_risk_reduced(c, w.squaredNorm(), nodes);
}

Vec population_grad_stein(const Vec& w, const TargetVector& target, int nodes) {
  const CurvatureScalars cs = curvature_scalars(w, target, nodes);
  Vec g = cs.a_of_w * w;
  for (int k = 0; k < target.s(); ++k) g(target.support()[k]) -= cs.a_star * target.values()[k];
  return g;
}

Vec noise_vector(const Vec& w, const Dataset& data, const TargetVector& target, int nodes) {
  return empirical_grad(w, data) - population_grad_stein(w, target, nodes);
}

double noise_bound_gamma(int n, int d, double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("confidence eta must lie in (0, 1)");
  if (n < 1 || d < 1) throw std::invalid_argument("n and d must be positive");
  return 4.0 * std::sqrt(std::log(2.0 * d / eta) / n);
}

std::string to_string(RiskMethod method) {
  switch (method) {
    case RiskMethod::empirical: return "empirical";
    case RiskMethod::soft: return "soft";
    case RiskMethod::population_quadrature: return "population-quadrature";
    case RiskMethod::population_montecarlo: return "population-montecarlo";
  }
  return "unknown";
}

}  // namespace sparselog
