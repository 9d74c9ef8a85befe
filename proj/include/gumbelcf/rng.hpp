#pragma once

/**
 * Counter-based uniform randomness.
 *
 * Every consumer of randomness in this library draws from a UniformStream: a
 * value-type handle on a Philox4x32-10 keystream. A stream is fully determined
 * by (key, nonce, position), so results never depend on scheduling, worker
 * count, or host. Streams for distinct purposes are derived by hashing a
 * (global seed, record id, stage, step) tuple, which keeps parallel experiment
 * runs reproducible without shared mutable state.
 */

#include <array>
#include <cstdint>
#include <string_view>

namespace gumbelcf::rng {

/// One Philox4x32-10 block: 4 output words from a 128-bit counter and 64-bit key.
std::array<uint32_t, 4> philox4x32(const std::array<uint32_t, 4>& counter,
                                   const std::array<uint32_t, 2>& key);

/**
 * Deterministic stream of doubles strictly inside (0,1).
 *
 * Two streams with equal (key, nonce, position) emit identical values. The
 * mapping to doubles keeps 53 random bits and can produce neither 0 nor 1,
 * so log(u) and log(-log u) are always finite.
 */
class UniformStream {
 public:
  UniformStream() = default;
  UniformStream(uint64_t key, uint64_t nonce, uint64_t position = 0)
      : key_(key), nonce_(nonce), position_(position) {}

  /// Next uniform in (0,1); advances the position by exactly one.
  double next();

  /// Raw 64-bit word behind position(); next() consumes one of these per call.
  uint64_t next_u64();

  uint64_t key() const { return key_; }
  uint64_t nonce() const { return nonce_; }
  uint64_t position() const { return position_; }
  void seek(uint64_t position) { position_ = position; }

  friend bool operator==(const UniformStream&, const UniformStream&) = default;

 private:
  uint64_t key_ = 0;
  uint64_t nonce_ = 0;
  uint64_t position_ = 0;
};

/**
 * Derive an independent stream for one (record, stage, step) slot.
 *
 * The tuple is length-prefix encoded and hashed with SHA-256; the digest
 * provides the Philox key and nonce. Distinct tuples therefore yield
 * statistically independent streams, and equal tuples always yield the same
 * stream.
 */
UniformStream derive_stream(uint64_t global_seed, std::string_view record_id,
                            std::string_view stage, uint64_t step);

}  // namespace gumbelcf::rng
