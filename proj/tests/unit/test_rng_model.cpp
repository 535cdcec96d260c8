#include <cmath>

#include <doctest.h>

#include "sparselog/model.hpp"
#include "sparselog/rng.hpp"

using namespace sparselog;
using doctest::Approx;

TEST_CASE("rng streams are reproducible and distinct") {
  RngStream a(5, 3), b(5, 3), c(5, 4);
  for (int k = 0; k < 100; ++k) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
  RngStream s1 = RngStream(5, 3).substream(1), s2 = RngStream(5, 3).substream(2);
  CHECK(s1.next_u64() != s2.next_u64());
}

TEST_CASE("rng normal and uniform moments") {
  RngStream r(1);
  const int m = 200000;
  double s = 0, s2 = 0, u = 0;
  for (int k = 0; k < m; ++k) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
    const double v = r.uniform();
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    u += v;
  }
  CHECK(std::abs(s / m) < 0.01);
  CHECK(std::abs(s2 / m - 1.0) < 0.015);
  CHECK(std::abs(u / m - 0.5) < 0.005);
  for (int k = 0; k < 1000; ++k) CHECK(r.below(7) < 7u);
}

TEST_CASE("sigmoid and logistic loss pinned values") {
  CHECK(sigmoid(2.0) == Approx(0.8807970779).epsilon(1e-10));
  CHECK(logistic_loss(-3.0) == Approx(3.0485873516).epsilon(1e-10));
  CHECK(logistic_loss(1.0) == Approx(0.3132616875).epsilon(1e-10));
  CHECK(sigmoid_prime(0.0) == 0.25);
  CHECK(std::isfinite(logistic_loss(-800.0)));
  CHECK(logistic_loss(-800.0) == Approx(800.0));
  CHECK(sigmoid(-800.0) >= 0.0);
}

TEST_CASE("sigmoid symmetry and loss derivative") {
  for (double t : {-30.0, -3.0, -0.5, 0.0, 0.7, 4.0, 25.0}) {
    CHECK(sigmoid(t) + sigmoid(-t) == Approx(1.0).epsilon(1e-15));
    const double h = 1e-6;
    const double fd = (logistic_loss(t + h) - logistic_loss(t - h)) / (2 * h);
    CHECK(fd == Approx(-sigmoid(-t)).epsilon(1e-6));
    CHECK(sigmoid_prime(t) == Approx(sigmoid(t) * sigmoid(-t)).epsilon(1e-12));
  }
}

TEST_CASE("target validation") {
  CHECK_NOTHROW(TargetVector::from_values(4, {0, 2}, {std::sqrt(0.5), std::sqrt(0.5)}));
  CHECK_THROWS_AS(TargetVector::from_values(4, {2, 0}, {std::sqrt(0.5), std::sqrt(0.5)}),
                  std::invalid_argument);
  CHECK_THROWS_AS(TargetVector::from_values(4, {0, 2}, {0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(TargetVector::from_values(4, {0, 2}, {-std::sqrt(0.5), std::sqrt(0.5)}),
                  std::invalid_argument);
  CHECK_THROWS_AS(TargetVector::from_values(2, {0, 1}, {std::sqrt(0.5), std::sqrt(0.5)}),
                  std::invalid_argument);
  RngStream r(0);
  CHECK_THROWS_AS(sample_target(5, 5, TargetProfile::flat, r), std::invalid_argument);
}

TEST_CASE("flat target has equal values and unit norm") {
  RngStream r(3);
  const TargetVector t = sample_target(50, 5, TargetProfile::flat, r);
  CHECK(t.s() == 5);
  CHECK(t.dense().norm() == Approx(1.0).epsilon(1e-14));
  for (double v : t.values()) CHECK(v == Approx(1.0 / std::sqrt(5.0)));
  for (int j = 0; j < 50; ++j) CHECK(t.in_support(j) == (t.dense()(j) != 0.0));
  CHECK(t.dense()(t.i_min()) == t.w_min());
}

TEST_CASE("datasets are deterministic and soft labels are exact") {
  RngStream r(9);
  const TargetVector t = sample_target(10, 3, TargetProfile::flat, r);
  RngStream a(4, 1), b(4, 1);
  const Dataset d1 = sample_dataset(t, 200, a, true);
  const Dataset d2 = sample_dataset(t, 200, b, true);
  CHECK((d1.X.array() == d2.X.array()).all());
  CHECK((d1.y.array() == d2.y.array()).all());
  const Vec ws = t.dense();
  for (int i = 0; i < d1.n(); ++i) {
    CHECK(std::abs(d1.y(i)) == 1.0);
    CHECK((*d1.soft)(i) == Approx(sigmoid(d1.X.row(i).dot(ws))).epsilon(1e-14));
  }
}

TEST_CASE("label frequency follows the link") {
  RngStream r(2);
  const TargetVector t = sample_target(6, 2, TargetProfile::flat, r);
  RngStream rd(8);
  const Dataset data = sample_dataset(t, 40000, rd, true);
  const double positives = (data.y.array() > 0).cast<double>().mean();
  const double expected = data.soft->mean();
  CHECK(std::abs(positives - expected) < 0.01);
  CHECK(std::abs(positives - 0.5) < 0.01);
}

TEST_CASE("separability: tiny samples separate, large samples do not") {
  RngStream r(1);
  const TargetVector t = sample_target(10, 3, TargetProfile::flat, r);
  RngStream a(2), b(3);
  CHECK(linear_separability(sample_dataset(t, 8, a, false)) == Separability::separable);
  CHECK(linear_separability(sample_dataset(t, 400, b, false)) == Separability::not_separable);
}
