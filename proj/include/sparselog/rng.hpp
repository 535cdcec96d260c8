#pragma once

#include <array>
#include <cstdint>

namespace sparselog {

/// Philox4x32-10 block cipher used as a counter-based generator.
/// Output for a given (key, counter) pair never depends on call history.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

std::uint64_t splitmix64(std::uint64_t x);

/// Reproducible random stream keyed by (seed, stream id).
///
/// Draws are a pure function of (seed, stream, position), so two streams built
/// from the same pair produce bit-identical sequences. Independent sub-streams
/// for parallel work are obtained with substream(), never by sharing a stream
/// between threads.
class RngStream {
public:
  RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  /// Derived stream whose id mixes this stream's id with `id`.
  RngStream substream(std::uint64_t id) const;

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sparselog
