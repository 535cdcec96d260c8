#include <cmath>

#include <doctest.h>

#include "sparselog/model.hpp"
#include "sparselog/risk.hpp"

using namespace sparselog;
using doctest::Approx;

namespace {

TargetVector flat_target(int d, int s, std::uint64_t seed = 0) {
  RngStream r(seed, 99);
  return sample_target(d, s, TargetProfile::flat, r);
}

}  // namespace

TEST_CASE("pinned population constants") {
  const RngStream base(0);
  const TargetVector t = flat_target(10, 3);
  const CurvatureScalars cs = curvature_scalars(Vec::Zero(10), t);
  CHECK(cs.kappa == Approx(0.206620964141907).epsilon(1e-12));
  CHECK(cs.a_star == cs.kappa);
  CHECK(cs.a_of_w == 0.25);
  CHECK(curvature_at_norm(1.0, 128) == Approx(0.206620964141907).epsilon(1e-12));
  CHECK(bayes_risk() == Approx(0.599438219205533).epsilon(1e-12));
  CHECK(population_risk_reduced(0.0, 1.0) == Approx(0.80605918334744).epsilon(1e-12));
  CHECK(population_risk_reduced(0.5, 4.0) == Approx(0.964403905980438).epsilon(1e-12));
  CHECK(population_risk_reduced(0.0, 0.0) == Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("noise bound gamma") {
  CHECK(noise_bound_gamma(1000, 50, 0.05) == Approx(0.348733).epsilon(1e-5));
  CHECK_THROWS_AS(noise_bound_gamma(1000, 50, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(noise_bound_gamma(1000, 50, 1.0), std::invalid_argument);
}

TEST_CASE("curvature decreases with the norm") {
  double prev = curvature_at_norm(0.0);
  CHECK(prev == 0.25);
  for (double r = 0.25; r <= 8.0; r += 0.25) {
    const double a = curvature_at_norm(r);
    CHECK(a < prev);
    prev = a;
  }
}

TEST_CASE("population risk depends on w only through two scalars") {
  const TargetVector t = flat_target(12, 4, 3);
  RngStream r(5);
  Vec w(12);
  for (int j = 0; j < 12; ++j) w(j) = r.normal();
  const Vec ws = t.dense();
  CHECK(population_risk(w, t) ==
        Approx(population_risk_reduced(w.dot(ws), w.squaredNorm())).epsilon(1e-14));
}

TEST_CASE("excess risk is nonnegative and vanishes at the target") {
  const TargetVector t = flat_target(8, 3, 4);
  CHECK(excess_risk(t.dense(), t) == 0.0);
  RngStream r(6);
  for (int trial = 0; trial < 200; ++trial) {
    Vec w(8);
    const double scale = 0.1 + 3.0 * r.uniform();
    for (int j = 0; j < 8; ++j) w(j) = scale * r.normal();
    CHECK(excess_risk(w, t) >= 0.0);
  }
  CHECK(excess_risk(1.001 * t.dense(), t) > 0.0);
}

TEST_CASE("population gradient matches finite differences of the risk") {
  const TargetVector t = flat_target(6, 2, 8);
  RngStream r(7);
  Vec w(6);
  for (int j = 0; j < 6; ++j) w(j) = 0.5 * r.normal();
  const Vec g = population_grad_stein(w, t, 96);
  const double h = 1e-5;
  for (int j = 0; j < 6; ++j) {
    Vec wp = w, wm = w;
    wp(j) += h;
    wm(j) -= h;
    const double fd = (population_risk(wp, t, 96) - population_risk(wm, t, 96)) / (2 * h);
    CHECK(std::abs(fd - g(j)) < 1e-8);
  }
  CHECK(population_grad_stein(t.dense(), t).norm() < 1e-14);
}

TEST_CASE("empirical risk, gradient and noise vector") {
  const TargetVector t = flat_target(10, 3, 9);
  RngStream r(10);
  const Dataset data = sample_dataset(t, 500, r, true);
  Vec w = Vec::Constant(10, 0.1);
  Vec g;
  const double risk = empirical_risk_grad(w, data, g);
  CHECK(risk == Approx(empirical_risk(w, data)).epsilon(1e-15));
  CHECK((g - empirical_grad(w, data)).norm() < 1e-15);
  CHECK(empirical_risk(Vec::Zero(10), data) == Approx(std::log(2.0)).epsilon(1e-14));
  const Vec z = noise_vector(t.dense(), data, t);
  CHECK((z - empirical_grad(t.dense(), data)).norm() < 1e-14);
  CHECK(soft_label_grad(t.dense(), data).norm() < 1e-14);
  Dataset hard = data;
  hard.soft.reset();
  CHECK_THROWS(soft_label_risk(w, hard));
}

TEST_CASE("risk method names") {
  CHECK(to_string(RiskMethod::population_quadrature) == "population-quadrature");
  CHECK(to_string(RiskMethod::empirical) == "empirical");
}
