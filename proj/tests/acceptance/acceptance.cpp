// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <omp.h>

#include "sparselog/io.hpp"
#include "sparselog/posterior.hpp"
#include "sparselog/riccati.hpp"
#include "sparselog/risk.hpp"
#include "sparselog/sweep.hpp"
#include "sparselog/trainers.hpp"
#include "sparselog/verify.hpp"

using namespace sparselog;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string g(double x) { return fmt("%.4g", x); }

struct Draw {
  TargetVector target;
  Dataset data;
};

Draw draw(int d, int s, int n, std::uint64_t seed) {
  const RngStream base(seed, static_cast<std::uint64_t>(d));
  RngStream r0 = base.substream(0), r1 = base.substream(1);
  TargetVector t = sample_target(d, s, TargetProfile::flat, r0);
  Dataset data = sample_dataset(t, n, r1, false);
  return {std::move(t), std::move(data)};
}

Outcome stein() {
  const OracleReport r = check_stein_identity(8, 3, 10'000'000, RngStream(101), 1e-2, 5);
  return {r.pass && r.seconds < 60.0,
          "max relative error " + g(r.discrepancy) + " (tolerance 0.01) at 5 points, d=8, s=3, 1e7 draws"};
}

Outcome minimizers() {
  const OracleReport r =
      check_soft_vs_hard_minimizers(10, 3, 200, 20, RngStream(102), 1e-8, 1e-3, 19.0 / 20.0);
  return {r.pass && r.seconds < 30.0, r.detail};
}

Outcome equivariance() {
  const Draw dr = draw(10, 3, 1000, 103);
  RngStream r(104);
  const double t_end = 5.0, dt = 1e-3;
  double single_max = 0.0, spindly_min = 1e300, perm_max = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const ColMat U = sample_rotation(10, r);
    single_max = std::max(single_max, equivariance_gap(Algo::single_gf, dr.data, U, t_end, dt));
    spindly_min = std::min(spindly_min, equivariance_gap(Algo::spindly_gf, dr.data, U, t_end, dt));
    std::vector<int> perm(10);
    std::iota(perm.begin(), perm.end(), 0);
    for (int k = 9; k > 0; --k) std::swap(perm[k], perm[r.below(k + 1)]);
    ColMat P = ColMat::Zero(10, 10);
    for (int i = 0; i < 10; ++i) P(perm[i], i) = r.uniform() < 0.5 ? -1.0 : 1.0;
    perm_max = std::max(perm_max, equivariance_gap(Algo::spindly_gf, dr.data, P, t_end, dt));
  }
  const bool ok = single_max < 1e-7 && spindly_min > 1e-2 && perm_max < 1e-7;
  return {ok, "single gap " + g(single_max) + " (< 1e-7), spindly Haar gap " + g(spindly_min) +
                  " (> 1e-2), spindly signed-permutation gap " + g(perm_max) + " (< 1e-7)"};
}

Outcome conservation() {
  const Draw dr = draw(50, 5, 1000, 105);
  const EnvelopeModel m = EnvelopeModel::from_target(dr.target, Vec::Zero(50));
  const double t_end = stopping_time(0.5, m) / 2.0;
  TrainConfig balanced = TrainConfig::for_duration(t_end, 1e-2);
  balanced.keep_iterates = false;
  TrainConfig unbalanced = balanced;
  RngStream r(106);
  Vec v0(50), w0(50);
  for (int j = 0; j < 50; ++j) {
    v0(j) = 0.05 + 0.2 * r.uniform();
    w0(j) = 0.02 * r.normal();
  }
  unbalanced.init = w0;
  unbalanced.init_v = v0;
  const Objective obj = empirical_objective(dr.data);
  const double a = flow_spindly(obj, balanced).balance_drift;
  const double b = flow_spindly(obj, unbalanced).balance_drift;
  return {std::max(a, b) < 1e-9, "max drift " + g(a) + " (balanced), " + g(b) +
                                     " (unbalanced) over flow time " + g(t_end) + ", d=50, n=1000"};
}

Outcome sandwich() {
  int held = 0;
  int total_violations = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Draw dr = draw(50, 5, 1000, 200 + seed);
    const EnvelopeModel m = EnvelopeModel::measured(dr.target, dr.data, 0.05);
    const SandwichReport rep = sandwich_check(m, envelope_grid(stopping_time(0.5, m)));
    held += rep.ok ? 1 : 0;
    total_violations += rep.violations;
  }
  return {held >= 18, std::to_string(held) + "/20 seeds with lower <= flow <= upper on 200 points (need 18), " +
                          std::to_string(total_violations) + " violations in total"};
}

Outcome stopping_consistency() {
  const Draw dr = draw(50, 5, 1000, 107);
  const EnvelopeModel m = EnvelopeModel::from_target(dr.target, Vec::Zero(50));
  double worst = 0.0;
  for (double eps : {0.3, 0.5, 0.7}) {
    const double T = stopping_time(eps, m);
    worst = std::max(worst, std::abs(lower_envelope_active(T, m.i_min, m) - (1 - eps) * m.w_min));
  }
  return {worst < 1e-9, "max |lower(T(eps)) - (1-eps) w_min| = " + g(worst) + " for eps in {0.3, 0.5, 0.7}"};
}

Outcome upper_bound() {
  const double eps = 0.5, eta = 0.05;
  const int s = 5, n = 1000, seeds = 20;
  int within = 0;
  double worst_ratio = 0.0;
  std::vector<double> mass;
  std::string masses;
  for (int d : {25, 50, 100}) {
    double mean_mass = 0.0;
    for (int seed = 0; seed < seeds; ++seed) {
      const Draw dr = draw(d, s, n, 300 + seed);
      const EnvelopeModel m = EnvelopeModel::from_target(dr.target, Vec::Zero(d));
      TrainConfig tc = TrainConfig::for_duration(stopping_time(eps, m) / 2.0, 1e-2);
      tc.keep_iterates = false;
      tc.record.stride = tc.steps;
      const Vec w = flow_spindly(empirical_objective(dr.data), tc).final_w;
      const Vec ws = dr.target.dense();
      double active = 0.0, inactive = 0.0;
      for (int i = 0; i < d; ++i) {
        if (dr.target.in_support(i))
          active += (w(i) - ws(i)) * (w(i) - ws(i));
        else
          inactive += w(i) * w(i);
      }
      mean_mass += inactive / seeds;
      if (d == 50) {
        const double bound = error_bound(m, eps, s, n, eta).active_total;
        within += active <= bound ? 1 : 0;
        worst_ratio = std::max(worst_ratio, active / bound);
      }
    }
    mass.push_back(mean_mass);
    masses += (masses.empty() ? "" : ", ") + g(mean_mass);
  }
  const bool decreasing = mass[0] > mass[1] && mass[1] > mass[2];
  return {within >= 18 && decreasing,
          "active error within bound on " + std::to_string(within) + "/20 seeds at d=50 (worst ratio " +
              g(worst_ratio) + "); mean inactive mass at d=25,50,100: " + masses};
}

Outcome posterior_scaling() {
  ExperimentConfig c;
  c.d_list = {5, 10, 20, 40};
  c.n = 400;
  c.seeds = {0, 1, 2, 3, 4, 5, 6, 7};
  c.mcmc_steps = 20'000;
  c.burn_in = 5'000;
  const PosteriorSweepResult r = run_posterior_sweep(c);
  const double e = r.exponents.front();
  std::string means;
  for (const auto& s : r.summary) means += (means.empty() ? "" : ", ") + g(s.mean_excess);
  return {e >= 0.8 && e <= 1.2, "exponent vs d-1 = " + g(e) + " (need [0.8, 1.2]); means " + means};
}

Outcome dimension_sweep() {
  ExperimentConfig c;  // d in {10, 20, 40, 80}, n = 1000, s = 5, 10 seeds
  const SweepResult r = run_dimension_sweep(c);
  const double single = r.slopes[0], spindly = r.slopes[1];
  bool below = true;
  std::string pairs;
  for (std::size_t k = 0; k + 1 < r.summary.size(); k += 2) {
    const auto& a = r.summary[k];
    const auto& b = r.summary[k + 1];
    if (a.d >= 20 && !(b.mean_excess < a.mean_excess)) below = false;
    pairs += (pairs.empty() ? "" : "; ") + ("d=" + std::to_string(a.d) + " " + g(a.mean_excess) + " vs " +
                                           g(b.mean_excess));
  }
  const bool ok = single >= 0.7 && single <= 1.3 && spindly <= 0.4 && below;
  return {ok, "single slope " + g(single) + " (need [0.7, 1.3]), spindly slope " + g(spindly) +
                  " (need <= 0.4); single vs spindly: " + pairs};
}

Outcome geometry() {
  // Jacobian against the finite-difference Gram determinant.
  Vec base(3);
  base << 0.48, 0.6, 0.64;
  const TangentChart chart(base);
  RngStream r(108);
  double jac_err = 0.0;
  for (int k = 0; k < 20; ++k) {
    Vec z(2);
    z << r.normal(), r.normal();
    const double h = 1e-6;
    Eigen::Matrix<double, 3, 2> J;
    for (int j = 0; j < 2; ++j) {
      Vec zp = z, zm = z;
      zp(j) += h;
      zm(j) -= h;
      J.col(j) = (chart.map(zp) - chart.map(zm)) / (2 * h);
    }
    const double gram = std::sqrt((J.transpose() * J).determinant());
    const double exact = chart_jacobian(z, 3);
    jac_err = std::max(jac_err, std::abs(gram - exact) / exact);
  }
  const Draw dr = draw(10, 3, 1, 109);
  const HessianCheck h = tangent_hessian_check(dr.target, 64, 1'000'000, RngStream(110));
  RngStream rq(111);
  const QuadraticCheck q = quadratic_lower_check(dr.target, 64, 500, 0.0, rq);
  const bool ok = jac_err < 1e-5 && h.max_offdiag_se <= 3.0 && q.pass_fraction == 1.0;
  return {ok, "jacobian rel err " + g(jac_err) + "; hessian max off-diagonal " + g(h.max_offdiag_se) +
                  " s.e. (need <= 3), kappa_hat " + g(h.kappa_hat) + "; quadratic bound held on " +
                  g(100.0 * q.pass_fraction) + "% of 500 points, radius " + g(q.radius)};
}

Outcome coverage() {
  const OracleReport r = check_noise_coverage(1000, 50, 0.05, 500, RngStream(112), 0.95);
  return {r.pass, r.detail};
}

}  // namespace

int main() {
  omp_set_num_threads(1);
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "Stein identity", 60, stein},
      {2, "soft-label recovery", 30, minimizers},
      {3, "rotation equivariance", 60, equivariance},
      {4, "conservation", 60, conservation},
      {5, "envelope sandwich", 300, sandwich},
      {6, "stopping-time self-consistency", 1, stopping_consistency},
      {7, "upper-bound rate", 600, upper_bound},
      {8, "posterior lower-bound scaling", 900, posterior_scaling},
      {9, "dimension sweep separation", 600, dimension_sweep},
      {10, "geometry", 300, geometry},
      {11, "noise bound coverage", 300, coverage},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.pass && secs < c.limit_seconds;
    failures += pass ? 0 : 1;
    std::printf("criterion %2d %s  %s: %s [%.1f s, limit %.0f s]\n", c.id, pass ? "PASS" : "FAIL", c.name,
                o.detail.c_str(), secs, c.limit_seconds);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
