#include <cmath>

#include <benchmark/benchmark.h>

#include "sparselog/kernels.hpp"
#include "sparselog/model.hpp"
#include "sparselog/rng.hpp"

using namespace sparselog;

namespace {

struct Problem {
  Dataset data;
  Vec w;
};

Problem make_problem(int n, int d) {
  RngStream rng(11, static_cast<std::uint64_t>(d));
  const TargetVector target = sample_target(d, 5, TargetProfile::flat, rng);
  Problem p{sample_dataset(target, n, rng, false), Vec::Zero(d)};
  for (int j = 0; j < d; ++j) p.w(j) = 0.1 * rng.normal();
  return p;
}

template <double (*Kernel)(const Mat&, const Vec&, const Vec&, Vec&)>
void risk_grad(benchmark::State& state) {
  const Problem p = make_problem(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  Vec grad(p.w.size());
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(p.data.X, p.data.y, p.w, grad));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <ColMat (*Kernel)(const Mat&, const Vec&)>
void hessian(benchmark::State& state) {
  const Problem p = make_problem(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(p.data.X, p.w));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void monte_carlo(benchmark::State& state) {
  const RngStream rng(3);
  const auto samples = static_cast<std::uint64_t>(state.range(0));
  auto fn = [](RngStream& s, double* sums) {
    const double z = s.normal();
    sums[0] += 1.0 / (1.0 + std::exp(-z));
  };
  for (auto _ : state) {
    if constexpr (Parallel)
      benchmark::DoNotOptimize(kernels::monte_carlo_parallel(rng, samples, 1, fn).sums[0]);
    else
      benchmark::DoNotOptimize(kernels::monte_carlo_serial(rng, samples, 1, fn).sums[0]);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(risk_grad<kernels::serial::logistic_risk_grad>)
    ->Name("risk_grad/serial")->Args({1000, 50})->Args({10000, 50})->Args({100000, 80});
BENCHMARK(risk_grad<kernels::parallel::logistic_risk_grad>)
    ->Name("risk_grad/parallel")->Args({1000, 50})->Args({10000, 50})->Args({100000, 80});
BENCHMARK(hessian<kernels::serial::logistic_hessian>)
    ->Name("hessian/serial")->Args({1000, 10})->Args({100000, 10});
BENCHMARK(hessian<kernels::parallel::logistic_hessian>)
    ->Name("hessian/parallel")->Args({1000, 10})->Args({100000, 10});
BENCHMARK(monte_carlo<false>)->Name("monte_carlo/serial")->Arg(1 << 20);
BENCHMARK(monte_carlo<true>)->Name("monte_carlo/parallel")->Arg(1 << 20);

BENCHMARK_MAIN();
