#include <cmath>

#include <doctest.h>

#include "sparselog/model.hpp"
#include "sparselog/risk.hpp"
#include "sparselog/trainers.hpp"

using namespace sparselog;
using doctest::Approx;

namespace {

struct Problem {
  TargetVector target;
  Dataset data;
};

Problem problem(int d, int s, int n, std::uint64_t seed) {
  RngStream r(seed, 77);
  TargetVector t = sample_target(d, s, TargetProfile::flat, r);
  Dataset data = sample_dataset(t, n, r, false);
  return {std::move(t), std::move(data)};
}

}  // namespace

TEST_CASE("algorithm names round-trip") {
  for (Algo a : {Algo::single_gf, Algo::spindly_gf, Algo::single_gd, Algo::spindly_gd, Algo::riccati})
    CHECK(parse_algo(to_string(a)) == a);
  CHECK(parse_algo("single") == Algo::single_gd);
  CHECK(parse_algo("spindly") == Algo::spindly_gd);
  CHECK_THROWS_AS(parse_algo("adam"), std::invalid_argument);
  CHECK(is_spindly(Algo::spindly_gf));
  CHECK_FALSE(is_spindly(Algo::single_gd));
}

TEST_CASE("record schedule") {
  RecordPolicy strided{5, 10'000};
  const auto a = record_schedule(23, strided);
  CHECK(a.front() == 0);
  CHECK(a.back() == 23);
  CHECK(a[1] == 5);
  const auto dense = record_schedule(100, RecordPolicy{});
  CHECK(dense.size() == 101);
  const auto thinned = record_schedule(1'000'000, RecordPolicy{0, 1000});
  CHECK(thinned.front() == 0);
  CHECK(thinned.back() == 1'000'000);
  CHECK(thinned.size() < 3000);
  for (std::size_t k = 1; k < thinned.size(); ++k) CHECK(thinned[k] > thinned[k - 1]);
}

TEST_CASE("for_duration lands on the end time") {
  const TrainConfig tc = TrainConfig::for_duration(1.0, 0.3);
  CHECK(tc.steps == 4);
  CHECK(tc.dt * tc.steps == Approx(1.0).epsilon(1e-15));
}

TEST_CASE("gradient descent decreases the training loss") {
  const Problem p = problem(10, 3, 500, 1);
  for (Algo a : {Algo::single_gd, Algo::spindly_gd}) {
    TrainConfig tc;
    tc.dt = 0.5;
    tc.steps = 200;
    tc.support = p.target.support();
    const Trajectory traj = train(a, empirical_objective(p.data), tc);
    CHECK(traj.size() == 201);
    for (std::size_t k = 1; k < traj.size(); ++k) CHECK(traj.train_loss[k] <= traj.train_loss[k - 1] + 1e-15);
    CHECK(traj.times.back() == Approx(100.0));
  }
}

TEST_CASE("active and inactive squared norms add up") {
  const Problem p = problem(8, 2, 300, 2);
  TrainConfig tc;
  tc.dt = 1.0;
  tc.steps = 20;
  tc.support = p.target.support();
  const Trajectory traj = train(Algo::single_gd, empirical_objective(p.data), tc);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double total = traj.iterates[k].squaredNorm();
    CHECK(std::abs(traj.norm_S[k] + traj.norm_Sc[k] - total) < 1e-10);
  }
}

TEST_CASE("spindly flow conserves u*u - v*v") {
  const Problem p = problem(10, 3, 400, 3);
  TrainConfig tc = TrainConfig::for_duration(5.0, 1e-2);
  tc.init_v = Vec::LinSpaced(10, 0.2, 0.5);
  tc.init = Vec::LinSpaced(10, -0.03, 0.04);
  const Trajectory traj = flow_spindly(empirical_objective(p.data), tc);
  CHECK(traj.balance_drift < 1e-12);
}

TEST_CASE("reduced spindly flow matches the factored flow from a balanced start") {
  const Problem p = problem(10, 3, 400, 4);
  TrainConfig tc = TrainConfig::for_duration(4.0, 1e-3);
  const Trajectory full = flow_spindly(empirical_objective(p.data), tc);
  const Trajectory reduced = flow_spindly_reduced(empirical_objective(p.data), tc);
  CHECK((full.final_w - reduced.final_w).norm() < 1e-9);
  CHECK(full.init_scale == Approx(1.0 / std::sqrt(10.0)));
}

TEST_CASE("population flow converges toward the target") {
  const Problem p = problem(6, 2, 10, 5);
  TrainConfig tc = TrainConfig::for_duration(200.0, 5e-2);
  tc.keep_iterates = false;
  const Trajectory traj = flow_single_layer(population_objective(p.target), tc);
  CHECK((traj.final_w - p.target.dense()).norm() < 1e-3);
}

TEST_CASE("early stopping picks the earliest minimum") {
  Trajectory t;
  t.times = {0, 1, 2, 3, 4};
  t.val_loss = {0.7, 0.5, 0.4, 0.4, 0.45};
  for (int k = 0; k < 5; ++k) t.iterates.push_back(Vec::Constant(2, k));
  const StopSelection s = early_stop_select(t);
  CHECK(s.index == 2);
  CHECK(s.time == 2.0);
  CHECK(s.w(0) == 2.0);
  Trajectory none;
  none.times = {0, 1};
  CHECK_THROWS(early_stop_select(none));
}

TEST_CASE("spindly descent with a huge step diverges") {
  const Problem p = problem(10, 3, 200, 6);
  TrainConfig tc;
  tc.dt = 1e4;
  tc.steps = 200;
  tc.alpha = 1.0;
  CHECK_THROWS_AS(train(Algo::spindly_gd, empirical_objective(p.data), tc), DivergenceError);
}

TEST_CASE("rotations are orthogonal and rotated data keep labels") {
  RngStream r(8);
  const ColMat U = sample_rotation(7, r);
  CHECK((U.transpose() * U - ColMat::Identity(7, 7)).norm() < 1e-13);
  const Problem p = problem(7, 2, 50, 7);
  const Dataset rot = rotate_dataset(p.data, U);
  CHECK((rot.y.array() == p.data.y.array()).all());
  CHECK((rot.X.row(3).transpose() - U * p.data.X.row(3).transpose()).norm() < 1e-13);
}

TEST_CASE("equivariance: single layer yes, spindly no") {
  const Problem p = problem(6, 2, 200, 9);
  RngStream r(10);
  const ColMat U = sample_rotation(6, r);
  CHECK(equivariance_gap(Algo::single_gf, p.data, U, 2.0, 1e-2) < 1e-10);
  CHECK(equivariance_gap(Algo::spindly_gf, p.data, U, 2.0, 1e-2) > 1e-2);
  ColMat P = ColMat::Zero(6, 6);
  const int perm[6] = {3, 0, 5, 1, 4, 2};
  for (int i = 0; i < 6; ++i) P(perm[i], i) = (i % 2 == 0) ? 1.0 : -1.0;
  CHECK(equivariance_gap(Algo::spindly_gf, p.data, P, 2.0, 1e-2) < 1e-10);
}
