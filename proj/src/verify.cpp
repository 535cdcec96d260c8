#include "sparselog/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "sparselog/kernels.hpp"
#include "sparselog/model.hpp"
#include "sparselog/newton.hpp"
#include "sparselog/posterior.hpp"
#include "sparselog/riccati.hpp"
#include "sparselog/risk.hpp"
#include "sparselog/trainers.hpp"

namespace sparselog {

namespace {

using Clock = std::chrono::steady_clock;

OracleReport timed(const std::function<OracleReport()>& fn) {
  const auto start = Clock::now();
  OracleReport r = fn();
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return r;
}

OracleReport finish(OracleReport r) {
  r.pass = r.discrepancy <= r.tolerance;
  return r;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

OracleReport check_stein_identity(int d, int s, std::uint64_t mc_samples, const RngStream& rng,
                                  double tol, int points) {
  RngStream setup = rng.substream(0);
  const TargetVector target = sample_target(d, s, TargetProfile::flat, setup);
  const Vec ws = target.dense();

  std::vector<Vec> ws_test;
  std::vector<Vec> closed;
  while (static_cast<int>(ws_test.size()) < points) {
    Vec w(d);
    for (int j = 0; j < d; ++j)
      w(j) = (setup.uniform() < 0.5 ? -1.0 : 1.0) * (0.25 + 0.5 * setup.uniform());
    const Vec g = population_grad_stein(w, target, 128);
    if (g.cwiseAbs().minCoeff() < 0.05) continue;
    ws_test.push_back(w);
    closed.push_back(g);
  }

  const std::size_t width = static_cast<std::size_t>(points) * d;
  const auto mc = kernels::monte_carlo_parallel(
      rng.substream(1), mc_samples, width, [&](RngStream& stream, double* acc) {
        Vec x(d);
        for (int j = 0; j < d; ++j) x(j) = stream.normal();
        const double t_star = x.dot(ws);
        const double p_star = sigmoid(t_star);
        for (int p = 0; p < points; ++p) {
          const double t = x.dot(ws_test[p]);
          const double resid = sigmoid(t) - p_star - 0.25 * (t - t_star);
          for (int j = 0; j < d; ++j) acc[p * d + j] += x(j) * resid;
        }
      });

  OracleReport r;
  r.name = "stein_identity";
  r.tolerance = tol;
  for (int p = 0; p < points; ++p)
    for (int j = 0; j < d; ++j) {
      const double est = mc.sums[p * d + j] / static_cast<double>(mc_samples) +
                         0.25 * (ws_test[p](j) - ws(j));
      r.discrepancy = std::max(r.discrepancy, std::abs(est - closed[p](j)) / std::abs(closed[p](j)));
    }
  r.resources = std::to_string(mc_samples) + " draws, " + std::to_string(points) + " points, d=" +
                std::to_string(d) + ", s=" + std::to_string(s);
  r.detail = "max coordinate relative error over all points";
  return finish(r);
}

OracleReport check_soft_vs_hard_minimizers(int d, int s, int n, int seeds, const RngStream& rng,
                                           double soft_tol, double hard_gap,
                                           double hard_fraction) {
  OracleReport r;
  r.name = "soft_vs_hard_minimizers";
  r.tolerance = soft_tol;
  int reruns = 0, hard_far = 0, zero_grad = 0, nonconverged = 0;
  double min_hard = std::numeric_limits<double>::infinity();
  for (int k = 0; k < seeds; ++k) {
    for (std::uint64_t attempt = 0;; ++attempt) {
      RngStream stream = rng.substream(static_cast<std::uint64_t>(k) * 1000 + attempt);
      const TargetVector target = sample_target(d, s, TargetProfile::flat, stream);
      const Dataset data = sample_dataset(target, n, stream, true);
      if (is_linearly_separable(data)) {
        ++reruns;
        continue;
      }
      const Vec ws = target.dense();
      const NewtonResult soft = newton_soft(data);
      const NewtonResult hard = newton_hard(data);
      if (!soft.converged || !hard.converged) ++nonconverged;
      r.discrepancy = std::max(r.discrepancy, (soft.w - ws).norm());
      const double hard_dist = (hard.w - ws).norm();
      min_hard = std::min(min_hard, hard_dist);
      if (hard_dist > hard_gap) ++hard_far;
      if (!(empirical_grad(ws, data).norm() > 0.0)) ++zero_grad;
      break;
    }
  }
  r.pass = r.discrepancy <= soft_tol && hard_far >= std::ceil(hard_fraction * seeds - 1e-9) &&
           zero_grad == 0 && nonconverged == 0;
  r.resources = std::to_string(seeds) + " problems, " + std::to_string(reruns) +
                " separable redraws, d=" + std::to_string(d) + ", n=" + std::to_string(n);
  r.detail = "hard minimizer farther than " + fmt(hard_gap) + " in " + std::to_string(hard_far) +
             "/" + std::to_string(seeds) + " runs (min distance " + fmt(min_hard) +
             "); zero hard gradients at w*: " + std::to_string(zero_grad) +
             "; non-converged Newton runs: " + std::to_string(nonconverged);
  return r;
}

namespace {

// Tangent-projected Hessian at w* and its spectrum relative to kappa.
struct TangentSpectrum {
  double max_rel_dev = 0.0;
  double annihilation = 0.0;
};

TangentSpectrum tangent_spectrum(const TargetVector& target, const Dataset& data, double kappa) {
  const int d = target.d();
  const Vec ws = target.dense();
  const ColMat H = kernels::parallel::logistic_hessian(data.X, ws);
  const ColMat P = ColMat::Identity(d, d) - ws * ws.transpose();
  const ColMat HT = P * H * P;
  const TangentChart chart(target);
  const ColMat reduced = chart.basis().transpose() * HT * chart.basis();
  Eigen::SelfAdjointEigenSolver<ColMat> eig(reduced, Eigen::EigenvaluesOnly);
  TangentSpectrum out;
  out.max_rel_dev = std::max(std::abs(eig.eigenvalues()(0) / kappa - 1.0),
                             std::abs(eig.eigenvalues()(d - 2) / kappa - 1.0));
  out.annihilation = (HT * ws).norm();
  return out;
}

}  // namespace

OracleReport check_hessian_concentration(int d, int n, int trials, const RngStream& rng,
                                         double annihilation_tol) {
  const double kappa = curvature_at_norm(1.0, 128);
  const double scale = std::sqrt((d + std::log(1.0 / 0.05)) / n);
  std::vector<double> c_hat;
  OracleReport r;
  r.name = "hessian_concentration";
  r.tolerance = annihilation_tol;
  for (int t = 0; t < trials; ++t) {
    RngStream stream = rng.substream(static_cast<std::uint64_t>(t));
    const TargetVector target = sample_target(d, std::min(5, d - 1), TargetProfile::flat, stream);
    const Dataset data = sample_dataset(target, n, stream, false);
    const TangentSpectrum spec = tangent_spectrum(target, data, kappa);
    c_hat.push_back(spec.max_rel_dev / scale);
    r.discrepancy = std::max(r.discrepancy, spec.annihilation);
  }
  std::sort(c_hat.begin(), c_hat.end());
  const std::size_t q = static_cast<std::size_t>(std::ceil(0.95 * trials)) - 1;
  r.resources = std::to_string(trials) + " trials, d=" + std::to_string(d) + ", n=" + std::to_string(n);
  r.detail = "fitted c_hat (95% of trials within (1 +- c_hat sqrt((d + log 20)/n)) kappa) = " +
             fmt(c_hat[std::min(q, c_hat.size() - 1)]) + "; discrepancy is max |H_T w*|";
  return finish(r);
}

OracleReport check_hessian_large_n(int d, int n, const RngStream& rng, double tol) {
  RngStream stream = rng.substream(0);
  const TargetVector target = sample_target(d, std::min(5, d - 1), TargetProfile::flat, stream);
  const Dataset data = sample_dataset(target, n, stream, false);
  const TangentSpectrum spec = tangent_spectrum(target, data, curvature_at_norm(1.0, 128));
  OracleReport r;
  r.name = "hessian_large_n";
  r.tolerance = tol;
  r.discrepancy = spec.max_rel_dev;
  r.resources = "d=" + std::to_string(d) + ", n=" + std::to_string(n);
  r.detail = "max |lambda / kappa - 1| of the tangent Hessian";
  return finish(r);
}

OracleReport check_noise_coverage(int n, int d, double eta, int trials, const RngStream& rng,
                                  double coverage) {
  const double gamma = noise_bound_gamma(n, d, eta);
  int covered = 0;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    RngStream stream = rng.substream(static_cast<std::uint64_t>(t));
    const TargetVector target = sample_target(d, std::min(5, d - 1), TargetProfile::flat, stream);
    const Dataset data = sample_dataset(target, n, stream, false);
    const double m = noise_vector(target.dense(), data, target).cwiseAbs().maxCoeff();
    worst = std::max(worst, m);
    if (m <= gamma) ++covered;
  }
  OracleReport r;
  r.name = "noise_coverage";
  r.tolerance = 1.0 - coverage;
  r.discrepancy = 1.0 - static_cast<double>(covered) / trials;
  r.resources = std::to_string(trials) + " datasets, n=" + std::to_string(n) + ", d=" + std::to_string(d);
  r.detail = "gamma = " + fmt(gamma) + ", covered " + std::to_string(covered) + "/" +
             std::to_string(trials) + ", largest max|zeta| = " + fmt(worst);
  return finish(r);
}

namespace {

std::vector<OracleReport> invariant_suite(const RngStream& rng, double scale) {
  std::vector<OracleReport> out;
  auto add = [&](std::string name, double discrepancy, double tol, std::string resources) {
    OracleReport r;
    r.name = "invariant." + std::move(name);
    r.discrepancy = discrepancy;
    r.tolerance = tol * scale;
    r.resources = std::move(resources);
    out.push_back(finish(r));
  };
  RngStream stream = rng.substream(100);

  {
    double worst = 0.0;
    for (double t = -40.0; t <= 40.0; t += 0.25)
      worst = std::max(worst, std::abs(sigmoid(t) + sigmoid(-t) - 1.0));
    add("sigmoid_symmetry", worst, 1e-12, "321 points");
  }
  {
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const double t = 8.0 * (stream.uniform() - 0.5);
      const double h = 1e-5;
      const double fd = (logistic_loss(t + h) - logistic_loss(t - h)) / (2 * h);
      worst = std::max(worst, std::abs(fd + sigmoid(-t)) / sigmoid(-t));
    }
    add("loss_derivative", worst, 1e-6, "20 points");
  }
  {
    const TargetVector target = sample_target(12, 3, TargetProfile::flat, stream);
    const Dataset data = sample_dataset(target, 500, stream, true);
    double worst = 0.0;
    for (int i = 0; i < data.n(); ++i) {
      double score = 0.0;
      for (int k = 0; k < target.s(); ++k)
        score += data.X(i, target.support()[k]) * target.values()[k];
      worst = std::max(worst, std::abs((*data.soft)(i) - sigmoid(score)));
    }
    add("soft_labels_exact", worst, 0.0, "n=500");
  }
  {
    const int d = 12;
    const TargetVector target = sample_target(d, 3, TargetProfile::flat, stream);
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      Vec w(d);
      for (int j = 0; j < d; ++j) w(j) = 0.4 * stream.normal();
      const ColMat U = sample_rotation(d, stream);
      const Vec uw = U * w;
      worst = std::max(worst, std::abs(curvature_scalars(w, target).a_of_w -
                                       curvature_scalars(uw, target).a_of_w));
    }
    add("curvature_rotation", worst, 1e-12, "5 rotations");
  }
  {
    const int d = 6;
    const TargetVector target = sample_target(d, 2, TargetProfile::flat, stream);
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      Vec w(d);
      for (int j = 0; j < d; ++j) w(j) = 0.5 * stream.normal();
      const Vec g = population_grad_stein(w, target, 96);
      for (int j = 0; j < d; ++j) {
        const double h = 1e-5;
        Vec wp = w, wm = w;
        wp(j) += h;
        wm(j) -= h;
        const double fd =
            (population_risk(wp, target, 96) - population_risk(wm, target, 96)) / (2 * h);
        worst = std::max(worst, std::abs(fd - g(j)) / std::max(std::abs(g(j)), 1e-2));
      }
    }
    add("population_grad_fd", worst, 1e-4, "5 points, 96 nodes");
  }
  {
    const TargetVector target = sample_target(20, 4, TargetProfile::flat, stream);
    const Dataset data = sample_dataset(target, 300, stream, false);
    TrainConfig cfg = TrainConfig::for_duration(10.0, 1e-2);
    // Unbalanced start, so u*u - v*v is a nonzero constant.
    Vec v0(20);
    for (int j = 0; j < 20; ++j) v0(j) = 0.1 + 0.3 * stream.uniform();
    cfg.init_v = v0;
    const Trajectory traj = flow_spindly(empirical_objective(data), cfg);
    add("spindly_conservation", traj.balance_drift, 1e-9, "d=20, n=300, t=10, unbalanced start");
  }
  {
    const TargetVector target = sample_target(15, 3, TargetProfile::flat, stream);
    const TangentChart chart(target);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      Vec z(14);
      for (int j = 0; j < 14; ++j) z(j) = stream.normal();
      z *= 10.0 * stream.uniform() / z.norm();
      worst = std::max(worst, (chart.pullback(chart.map(z)) - z).norm());
    }
    add("chart_roundtrip", worst, 1e-10, "20 points, |z| <= 10");
  }
  {
    const TargetVector target = sample_target(50, 5, TargetProfile::flat, stream);
    const EnvelopeModel model = EnvelopeModel::from_target(target, Vec::Zero(50));
    double worst = 0.0;
    for (double eps : {0.3, 0.5, 0.7}) {
      const double T = stopping_time(eps, model);
      worst = std::max(worst, std::abs(lower_envelope_active(T, model.i_min, model) -
                                       (1.0 - eps) * model.w_min));
    }
    add("stopping_time_inversion", worst, 1e-9, "eps in {0.3, 0.5, 0.7}");
  }
  return out;
}

}  // namespace

std::vector<std::string> known_suites() {
  return {"stein", "minimizers", "hessian", "coverage", "invariants"};
}

std::vector<OracleReport> run_all(const VerifyConfig& cfg) {
  if (cfg.suites.empty()) throw std::invalid_argument("verify: no suites selected");
  if (!(cfg.tolerance_scale > 0.0)) throw std::invalid_argument("tolerance scale must be positive");
  std::vector<std::string> suites;
  for (const auto& s : cfg.suites) {
    if (s == "all") {
      suites = known_suites();
      break;
    }
    const auto known = known_suites();
    if (std::find(known.begin(), known.end(), s) == known.end())
      throw std::invalid_argument("verify: unknown suite '" + s + "'");
    suites.push_back(s);
  }
  const RngStream root(cfg.seed, 0x5e7f);
  const double k = cfg.tolerance_scale;
  std::vector<OracleReport> reports;
  auto selected = [&](const char* name) {
    return std::find(suites.begin(), suites.end(), name) != suites.end();
  };
  if (selected("stein"))
    reports.push_back(timed([&] {
      return check_stein_identity(8, 3, cfg.stein_samples, root.substream(1), 1e-2 * k);
    }));
  if (selected("minimizers"))
    reports.push_back(timed([&] {
      return check_soft_vs_hard_minimizers(10, 3, 200, cfg.minimizer_seeds, root.substream(2),
                                           1e-8 * k);
    }));
  if (selected("hessian")) {
    reports.push_back(timed([&] {
      return check_hessian_concentration(20, 500, cfg.hessian_trials, root.substream(3), 1e-10 * k);
    }));
    reports.push_back(timed([&] { return check_hessian_large_n(10, 100'000, root.substream(4), 0.02 * k); }));
  }
  if (selected("coverage"))
    reports.push_back(timed([&] {
      // Tightening moves the bound, not the required coverage.
      OracleReport r = check_noise_coverage(1000, 50, 0.05, cfg.coverage_trials, root.substream(5));
      r.tolerance *= k;
      return finish(r);
    }));
  if (selected("invariants")) {
    const auto start = Clock::now();
    auto inv = invariant_suite(root.substream(6), k);
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    for (auto& r : inv) {
      r.seconds = secs / inv.size();
      reports.push_back(std::move(r));
    }
  }
  std::stable_sort(reports.begin(), reports.end(),
                   [](const OracleReport& a, const OracleReport& b) { return a.name < b.name; });
  return reports;
}

bool all_passed(const std::vector<OracleReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const OracleReport& r) { return r.pass; });
}

}  // namespace sparselog
