#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "sparselog/rng.hpp"
#include "sparselog/types.hpp"

// Data-parallel inner loops. Every kernel has a serial reference and an
// OpenMP version. The OpenMP versions reduce fixed-size chunks in chunk order,
// so their results do not depend on the thread count.
namespace sparselog::kernels {

/// Rows per reduction chunk in the OpenMP kernels.
inline constexpr Eigen::Index kChunkRows = 512;

namespace serial {

/// (1/n) sum l(y_i x_i . w).
double logistic_risk(const Mat& X, const Vec& y, const Vec& w);
/// Returns the risk; writes -(1/n) sum y_i sigma(-y_i x_i . w) x_i into grad.
double logistic_risk_grad(const Mat& X, const Vec& y, const Vec& w, Vec& grad);
/// Soft-label cross entropy and gradient (1/n) sum (sigma(x_i . w) - p_i) x_i.
double soft_risk_grad(const Mat& X, const Vec& soft, const Vec& w, Vec* grad);
/// (1/n) sum sigma'(x_i . w) x_i x_i^T.
ColMat logistic_hessian(const Mat& X, const Vec& w);

}  // namespace serial

namespace parallel {

double logistic_risk(const Mat& X, const Vec& y, const Vec& w);
double logistic_risk_grad(const Mat& X, const Vec& y, const Vec& w, Vec& grad);
double soft_risk_grad(const Mat& X, const Vec& soft, const Vec& w, Vec* grad);
ColMat logistic_hessian(const Mat& X, const Vec& w);

}  // namespace parallel

/// Block-structured Monte Carlo accumulation.
///
/// `samples` draws are split into blocks of `block` draws; block b uses
/// rng.substream(b) and is accumulated serially into its own partial sums,
/// and the partials are added in block order. The result is therefore
/// identical for the serial and threaded drivers and for any thread count.
/// `Accumulate` is called as fn(stream, sums) once per draw, where sums is a
/// span of `width` doubles owned by the current block.
struct MonteCarloSums {
  std::vector<double> sums;  // sum over draws of each accumulated quantity
  std::uint64_t samples = 0;
};

template <class Accumulate>
MonteCarloSums monte_carlo_serial(const RngStream& rng, std::uint64_t samples, std::size_t width,
                                  Accumulate&& fn, std::uint64_t block = 1u << 14) {
  const std::uint64_t blocks = (samples + block - 1) / block;
  MonteCarloSums out{std::vector<double>(width, 0.0), samples};
  std::vector<double> partial(width);
  for (std::uint64_t b = 0; b < blocks; ++b) {
    std::fill(partial.begin(), partial.end(), 0.0);
    RngStream stream = rng.substream(b);
    const std::uint64_t count = std::min(block, samples - b * block);
    for (std::uint64_t k = 0; k < count; ++k) fn(stream, partial.data());
    for (std::size_t q = 0; q < width; ++q) out.sums[q] += partial[q];
  }
  return out;
}

template <class Accumulate>
MonteCarloSums monte_carlo_parallel(const RngStream& rng, std::uint64_t samples, std::size_t width,
                                    Accumulate&& fn, std::uint64_t block = 1u << 14) {
  const std::uint64_t blocks = (samples + block - 1) / block;
  std::vector<double> partials(blocks * width, 0.0);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t bi = 0; bi < static_cast<std::int64_t>(blocks); ++bi) {
    const auto b = static_cast<std::uint64_t>(bi);
    RngStream stream = rng.substream(b);
    double* partial = partials.data() + b * width;
    const std::uint64_t count = std::min(block, samples - b * block);
    for (std::uint64_t k = 0; k < count; ++k) fn(stream, partial);
  }
  MonteCarloSums out{std::vector<double>(width, 0.0), samples};
  for (std::uint64_t b = 0; b < blocks; ++b)
    for (std::size_t q = 0; q < width; ++q) out.sums[q] += partials[b * width + q];
  return out;
}

}  // namespace sparselog::kernels
