#include "sparselog/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sparselog/kernels.hpp"
#include "sparselog/risk.hpp"

namespace sparselog {

TangentChart::TangentChart(const TargetVector& target) : TangentChart(target.dense()) {}

TangentChart::TangentChart(Vec base) : base_(std::move(base)) {
  const int d = static_cast<int>(base_.size());
  if (d < 2) throw std::invalid_argument("chart needs d >= 2");
  if (std::abs(base_.norm() - 1.0) > 1e-12) throw std::invalid_argument("chart base must have unit norm");
  Eigen::HouseholderQR<ColMat> qr{ColMat(base_)};
  const ColMat Q = qr.householderQ() * ColMat::Identity(d, d);
  basis_ = Q.rightCols(d - 1);
}

Vec TangentChart::map(const Vec& z) const {
  if (z.size() != d() - 1) throw std::invalid_argument("chart coordinates must have length d - 1");
  return (base_ + basis_ * z) / std::sqrt(1.0 + z.squaredNorm());
}

Vec TangentChart::pullback(const Vec& w) const {
  if (w.size() != d()) throw std::invalid_argument("point must have length d");
  const double c = w.dot(base_);
  if (!(c > 0.0)) throw std::domain_error("point lies outside the chart hemisphere");
  return basis_.transpose() * w / c;
}

Vec chart_map(const Vec& z, const TangentChart& chart) { return chart.map(z); }
Vec chart_pullback(const Vec& w, const TangentChart& chart) { return chart.pullback(w); }

double chart_jacobian(const Vec& z, int d) { return std::pow(1.0 + z.squaredNorm(), -0.5 * d); }

double log_posterior(const Vec& z, const Dataset& data, const TangentChart& chart, Vec* grad) {
  const int d = chart.d();
  const double q = 1.0 + z.squaredNorm();
  double value = -0.5 * d * std::log(q);
  if (grad) *grad = -static_cast<double>(d) / q * z;
  if (data.n() == 0) return value;
  if (data.d() != d) throw std::invalid_argument("data and chart dimensions differ");

  const Vec w = chart.map(z);
  const double n = data.n();
  if (!grad) return value - n * kernels::parallel::logistic_risk(data.X, data.y, w);
  Vec g;
  value -= n * kernels::parallel::logistic_risk_grad(data.X, data.y, w, g);
  // dw/dz = (B - w z^T / sqrt(q)) / sqrt(q)
  const double root = std::sqrt(q);
  *grad -= n * (chart.basis().transpose() * g - z * (w.dot(g) / root)) / root;
  return value;
}

PosteriorChain sample_posterior(const Dataset& data, const TangentChart& chart,
                                const SamplerConfig& cfg, RngStream& rng) {
  if (!(cfg.steps > cfg.burn_in && cfg.burn_in >= 0))
    throw std::invalid_argument("sampler needs steps > burn_in >= 0");
  if (!(cfg.target_accept > 0.0 && cfg.target_accept < 1.0))
    throw std::invalid_argument("target acceptance must lie in (0, 1)");
  if (cfg.thin < 1) throw std::invalid_argument("thinning stride must be positive");
  const int m = chart.d() - 1;
  PosteriorChain chain;
  chain.burn_in = cfg.burn_in;
  chain.steps = cfg.steps;
  chain.seed = rng.seed();

  double log_step = std::log(cfg.initial_step > 0.0
                                 ? cfg.initial_step
                                 : 2.38 / std::sqrt(m * (0.25 * data.n() + chart.d())));
  Vec z = Vec::Zero(m);
  double lp = log_posterior(z, data, chart);
  Vec proposal(m);
  long accepted_after = 0;
  for (long k = 0; k < cfg.steps; ++k) {
    const double step = std::exp(log_step);
    for (int j = 0; j < m; ++j) proposal(j) = z(j) + step * rng.normal();
    const double lp_new = log_posterior(proposal, data, chart);
    const double log_ratio = lp_new - lp;
    const double accept_prob = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
    const bool accept = rng.uniform() < accept_prob;
    if (accept) {
      z = proposal;
      lp = lp_new;
    }
    if (k < cfg.burn_in) {
      log_step += (accept_prob - cfg.target_accept) / std::pow(k + 1.0, 0.6);
      continue;
    }
    if (accept) ++accepted_after;
    if ((k - cfg.burn_in) % cfg.thin == 0) {
      chain.z.push_back(z);
      chain.w.push_back(chart.map(z));
      chain.logpost.push_back(lp);
      chain.accepted.push_back(accept ? 1 : 0);
    }
  }
  chain.step = std::exp(log_step);
  chain.acceptance_rate = static_cast<double>(accepted_after) / (cfg.steps - cfg.burn_in);
  if (chain.acceptance_rate < 0.05 || chain.acceptance_rate > 0.95)
    chain.warnings.push_back("acceptance rate " + std::to_string(chain.acceptance_rate) +
                             " outside [0.05, 0.95] after adaptation");
  return chain;
}

std::vector<double> chain_excess(const PosteriorChain& chain, const TargetVector& target,
                                 int nodes) {
  const Vec ws = target.dense();
  std::vector<double> out;
  out.reserve(chain.w.size());
  for (const Vec& w : chain.w) out.push_back(excess_risk_reduced(w.dot(ws), w.squaredNorm(), nodes));
  return out;
}

PosteriorEstimate batch_means(const std::vector<double>& values, int batches) {
  if (values.empty()) throw std::invalid_argument("batch means of an empty sample");
  PosteriorEstimate est;
  est.samples = values.size();
  double total = 0.0;
  for (double v : values) total += v;
  est.mean = total / values.size();
  const std::size_t b = std::min<std::size_t>(batches, values.size());
  if (b < 2) return est;
  const std::size_t len = values.size() / b;
  double ss = 0.0;
  for (std::size_t q = 0; q < b; ++q) {
    double m = 0.0;
    for (std::size_t k = q * len; k < (q + 1) * len; ++k) m += values[k];
    m /= len;
    ss += (m - est.mean) * (m - est.mean);
  }
  est.std_error = std::sqrt(ss / (b - 1) / b);
  return est;
}

PosteriorEstimate posterior_excess_risk(const PosteriorChain& chain, const TargetVector& target,
                                        int nodes) {
  return batch_means(chain_excess(chain, target, nodes));
}

HessianCheck tangent_hessian_check(const TargetVector& target, int nodes, std::uint64_t mc_samples,
                                   const RngStream& rng) {
  const TangentChart chart(target);
  const int d = target.d();
  const int m = d - 1;
  const Vec ws = target.dense();
  const ColMat& B = chart.basis();
  const std::size_t mm = static_cast<std::size_t>(m) * m;
  auto sums = kernels::monte_carlo_parallel(rng, mc_samples, 2 * mm, [&](RngStream& s, double* acc) {
    Vec x(d);
    for (int j = 0; j < d; ++j) x(j) = s.normal();
    const double weight = sigmoid_prime(x.dot(ws));
    const Vec y = B.transpose() * x;
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        const double h = weight * y(a) * y(b);
        acc[a * m + b] += h;
        acc[mm + a * m + b] += h * h;
      }
  });

  HessianCheck out;
  out.samples = mc_samples;
  out.kappa_quadrature = curvature_at_norm(1.0, nodes);
  const double N = static_cast<double>(mc_samples);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const double mean = sums.sums[a * m + b] / N;
      const double var = std::max(0.0, sums.sums[mm + a * m + b] / N - mean * mean);
      const double se = std::sqrt(var / N);
      if (a == b) {
        out.trace += mean;
        const double dev = std::abs(mean - out.kappa_quadrature);
        out.max_diag_dev = std::max(out.max_diag_dev, dev);
        out.max_diag_dev_se = std::max(out.max_diag_dev_se, dev / se);
      } else {
        out.max_offdiag = std::max(out.max_offdiag, std::abs(mean));
        out.max_offdiag_se = std::max(out.max_offdiag_se, std::abs(mean) / se);
      }
    }
  out.kappa_hat = out.trace / m;
  return out;
}

double chi_moment(int d, double k) {
  if (d < 1) throw std::invalid_argument("chi moment needs d >= 1");
  return std::exp(0.5 * k * std::log(2.0) + std::lgamma(0.5 * (d + k)) - std::lgamma(0.5 * d));
}

double quadratic_constant(double R) {
  return R >= 2.0 ? (1.0 / 3.0) / (1.0 + 1.0 / (R * R)) : 4.0 / 15.0;
}

QuadraticCheck quadratic_lower_check(const TargetVector& target, int nodes, int trials,
                                     double radius, RngStream& rng) {
  if (trials < 1) throw std::invalid_argument("need at least one trial");
  const TangentChart chart(target);
  const int d = target.d();
  const int m = d - 1;
  const double kappa = curvature_at_norm(1.0, nodes);
  QuadraticCheck out;
  out.trials = trials;
  out.R = chi_moment(d, 3.0) / (kappa * chi_moment(d, 2.0));
  const double r_max = std::min(0.5, 1.0 / out.R);
  out.radius = radius > 0.0 ? radius : r_max;
  if (out.radius > r_max * (1.0 + 1e-12))
    throw std::invalid_argument("radius exceeds min(1/2, 1/R)");
  out.constant = quadratic_constant(out.R);

  const Vec ws = target.dense();
  int passed = 0;
  out.min_ratio = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    Vec z(m);
    for (int j = 0; j < m; ++j) z(j) = rng.normal();
    const double rho = out.radius * std::pow(rng.uniform(), 1.0 / m);
    z *= rho / z.norm();
    const Vec w = chart.map(z);
    const double excess = excess_risk_reduced(w.dot(ws), w.squaredNorm(), nodes);
    const double quad = kappa * z.squaredNorm();
    if (excess >= out.constant * quad) ++passed;
    out.min_ratio = std::min(out.min_ratio, excess / quad);
  }
  out.pass_fraction = static_cast<double>(passed) / trials;
  return out;
}

}  // namespace sparselog
