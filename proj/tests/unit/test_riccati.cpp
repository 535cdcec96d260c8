#include <cmath>

#include <doctest.h>

#include "sparselog/model.hpp"
#include "sparselog/riccati.hpp"
#include "sparselog/risk.hpp"

using namespace sparselog;
using doctest::Approx;

namespace {

EnvelopeModel noiseless(int d, int s) {
  std::vector<int> support(s);
  for (int k = 0; k < s; ++k) support[k] = k;
  return EnvelopeModel::make(d, support, std::vector<double>(s, 1.0 / std::sqrt(double(s))),
                             Vec::Zero(d));
}

}  // namespace

TEST_CASE("riccati scalar solves its ODE") {
  for (double b : {-0.3, 0.0, 1e-12, 0.5}) {
    const double w0 = 0.02, c = 0.25;
    double w = w0;
    const double h = 1e-3;
    for (int k = 0; k < 5000; ++k) {
      auto f = [&](double x) { return b * x - c * x * x; };
      const double k1 = f(w), k2 = f(w + h / 2 * k1), k3 = f(w + h / 2 * k2), k4 = f(w + h * k3);
      w += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    CHECK(riccati_scalar(w0, b, c, 5.0) == Approx(w).epsilon(1e-10));
  }
  CHECK(riccati_scalar(0.1, 1.0, 0.5, 0.0) == Approx(0.1));
  CHECK(riccati_scalar(0.1, 1.0, 0.5, 1e3) == Approx(2.0));
}

TEST_CASE("stopping time: exact inversion and the alternative expression") {
  const EnvelopeModel m = noiseless(50, 5);
  CHECK(m.a_star == Approx(0.206620964141907).epsilon(1e-12));
  CHECK(stopping_time(0.5, m) == Approx(35.5757).epsilon(1e-5));
  CHECK(stopping_time_alternative(0.5, m) == Approx(10.1147).epsilon(1e-4));
  for (double eps : {0.3, 0.5, 0.7}) {
    const double T = stopping_time(eps, m);
    CHECK(lower_envelope_active(T, m.i_min, m) == Approx((1 - eps) * m.w_min).epsilon(1e-12));
  }
  CHECK_THROWS_AS(stopping_time(0.0, m), std::domain_error);
  CHECK_THROWS_AS(stopping_time(1.0, m), std::domain_error);
}

TEST_CASE("envelopes order and limits") {
  const EnvelopeModel m = noiseless(20, 4);
  for (double t : {0.0, 1.0, 10.0, 50.0}) {
    const double lo = lower_envelope_active(t, 0, m), hi = upper_envelope_active(t, 0, m);
    CHECK(lo <= hi);
    if (t == 0.0) {
      CHECK(lo == Approx(1.0 / 20));
      CHECK(hi == Approx(1.0 / 20));
    }
    const InactiveEnvelope in = upper_envelope_inactive(t, 10, m);
    CHECK(in.lower <= in.closed_form + 1e-15);
    CHECK(in.closed_form <= in.exp_bound + 1e-15);
    CHECK(in.exp_bound_loose == Approx(2 * in.exp_bound));
  }
  CHECK(upper_envelope_active(1e4, 0, m) == Approx(m.w_star(0)).epsilon(1e-8));
  Vec zeta = Vec::Zero(20);
  zeta(0) = -1.0;
  const EnvelopeModel bad = EnvelopeModel::make(20, {0, 1, 2, 3}, std::vector<double>(4, 0.5), zeta);
  CHECK_THROWS_AS(lower_envelope_active(1.0, 0, bad), std::domain_error);
  CHECK_THROWS_AS(upper_envelope_active(1.0, 0, bad), std::domain_error);
}

TEST_CASE("full-support model is allowed") {
  const EnvelopeModel m = noiseless(4, 4);
  CHECK(m.s() == 4);
  CHECK(m.w_min == Approx(0.5));
}

TEST_CASE("coupled flow stays between the envelopes without noise") {
  const EnvelopeModel m = noiseless(20, 4);
  const double T = stopping_time(0.5, m);
  const SandwichReport rep = sandwich_check(m, envelope_grid(T, 50));
  CHECK(rep.ok);
  CHECK(rep.violations == 0);
  CHECK(rep.a_min >= m.a_star - 1e-12);
  CHECK(rep.a_max <= 0.25);
  const Trajectory traj = riccati_flow(m, T, 1e-2);
  CHECK(traj.algo == Algo::riccati);
  CHECK(std::abs(traj.final_w(0) - lower_envelope_active(T, 0, m)) < 0.5 * m.w_min);
}

TEST_CASE("flow sampled at requested times") {
  const EnvelopeModel m = noiseless(10, 2);
  const std::vector<double> times{0.0, 0.5, 2.0, 7.25};
  const auto states = riccati_flow_at(m, times);
  REQUIRE(states.size() == 4);
  CHECK(states[0](0) == Approx(0.1));
  const Trajectory traj = riccati_flow(m, 7.25, 1e-3);
  CHECK((states[3] - traj.final_w).norm() < 1e-9);
}

TEST_CASE("envelope grid") {
  const auto g = envelope_grid(10.0);
  CHECK(g.size() == 200);
  CHECK(g.front() == 0.0);
  CHECK(g[1] == Approx(1e-2));
  CHECK(g.back() == Approx(10.0).epsilon(1e-14));
  for (std::size_t k = 1; k < g.size(); ++k) CHECK(g[k] > g[k - 1]);
}

TEST_CASE("bound terms") {
  const EnvelopeModel m = noiseless(50, 5);
  const BoundReport b = error_bound(m, 0.5, 5, 1000, 0.05);
  CHECK(b.term_signal == Approx(0.25));
  const double expected = 16.0 * 5 * std::log(2 * 50 / 0.05) / (1000 * std::pow(m.w_min * m.a_star, 2));
  CHECK(b.term_noise == Approx(expected).epsilon(1e-14));
  CHECK(b.active_total == Approx(b.term_signal + b.term_noise));
  CHECK_FALSE(b.total.has_value());
  CHECK(b.eps_ok);
}

TEST_CASE("weakest coordinate dominates the stopping time") {
  std::vector<double> values{0.3, 0.4, 0.5};
  double sq = 0;
  for (double v : values) sq += v * v;
  for (double& v : values) v /= std::sqrt(sq);
  const EnvelopeModel m = EnvelopeModel::make(30, {2, 5, 9}, values, Vec::Zero(30));
  CHECK(m.i_min == 2);
  const DominanceReport rep = weakest_coordinate_dominance(m, 0.5);
  CHECK(rep.ok);
  for (double e : rep.rel_error) CHECK(e <= 0.5 + 1e-12);
}

TEST_CASE("c2 fit and empirical window") {
  const std::vector<double> dims{25, 50, 100};
  std::vector<double> mass;
  for (double d : dims) mass.push_back(3.0 * std::pow(d, -0.9));
  CHECK(fit_c2(dims, mass, 0.4) == Approx(3.0).epsilon(1e-12));
  const std::vector<double> t{0, 1, 2, 3, 4, 5};
  const std::vector<double> err{5, 3, 1, 0.5, 0.8, 2};
  CHECK(empirical_window(t, err, 3.0, 1.0) == Approx(1.0));
  CHECK(empirical_window(t, err, 0.0, 1.0) == 0.0);
}

TEST_CASE("measured model uses the negated gradient noise") {
  RngStream r(4);
  const TargetVector t = sample_target(20, 3, TargetProfile::flat, r);
  const Dataset data = sample_dataset(t, 500, r, false);
  const EnvelopeModel m = EnvelopeModel::measured(t, data, 0.05);
  CHECK((m.zeta + noise_vector(t.dense(), data, t)).norm() < 1e-15);
  REQUIRE(m.gamma.has_value());
  CHECK(*m.gamma == Approx(noise_bound_gamma(500, 20, 0.05)));
}
