#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include "digs/point.hpp"

namespace digs {

/// Philox4x32-10 counter-based generator.
///
/// The 64-bit key is the seed; the 128-bit counter is split into a 64-bit
/// block index (low words) and a 64-bit stream id (high words). `split(id)`
/// derives an independent substream by mixing `id` into the key, so a chain's
/// draws depend only on (seed, stream path) and never on scheduling order.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;

  explicit Philox4x32(std::uint64_t seed = 0, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  std::uint64_t seed() const { return key_; }
  std::uint64_t stream() const { return stream_; }

  /// Raw block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                            std::array<std::uint32_t, 2> key);

 private:
  void refill();

  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t block_index_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;
};

/// Seeded random source used by every sampler.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0) : engine_(seed, stream) {}

  /// Independent child generator for substream `id`.
  Rng split(std::uint64_t id) const;

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  Point normal_vector(Eigen::Index dim);
  /// Overwrites every entry of `out` with a standard normal draw.
  void fill_normal(Point& out);
  /// Index in [0, n).
  std::size_t below(std::size_t n);

  Philox4x32& engine() { return engine_; }

 private:
  Philox4x32 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer; used for key derivation.
std::uint64_t mix64(std::uint64_t x);

}  // namespace digs
