#pragma once

#include <cstdint>
#include <random>

#include "pace/common.hpp"

namespace pace {

/// Reproducible random stream addressed by (seed, stream_id).
///
/// Equal (seed, stream_id) pairs yield bitwise-identical sequences; distinct
/// stream ids give statistically independent streams, so parallel repetitions
/// can each own stream (seed, rep_index) without coordination. The engine is
/// std::mt19937_64 (fully specified by the standard) and all variate
/// transforms are implemented here, so sequences are stable across platforms.
class RngStream {
public:
  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Derive an independent child stream; deterministic in (parent, id).
  RngStream substream(std::uint64_t id) const;

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller (pairs generated, one cached).
  double normal();

  /// Integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);

private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Fisher-Yates shuffle of 0..n-1, driven by the given stream.
std::vector<Index> shuffled_indices(Index n, RngStream& rng);

} // namespace pace
