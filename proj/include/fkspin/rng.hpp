// Copyright 2026 The fkspin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

/**
 * Counter-based random streams.
 *
 * Every stream is a pure function of (experiment seed, sample index, role):
 * the Philox4x32-10 bijection is applied to a counter whose high words hold
 * the sample index and role, and whose low word counts 128-bit blocks within
 * the stream.  Sample i therefore sees the same numbers no matter which
 * worker evaluates it or in which order.
 */

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace fkspin {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter apply(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kW0;
        key[1] += kW1;
      }
      const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;
};

/// Independent sub-streams of one sample.  Adding a draw to one role never
/// shifts the numbers seen by another.
enum class StreamRole : std::uint32_t {
  subordinator = 1,
  brownian = 2,
  jumps = 3,
  start_point = 4,
  start_spin = 5,
};

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t sample_index, StreamRole role)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        index_lo_(static_cast<std::uint32_t>(sample_index)),
        index_hi_(static_cast<std::uint32_t>(sample_index >> 32)),
        role_(static_cast<std::uint32_t>(role)) {}

  std::uint64_t next_u64() {
    if (pos_ == 2) refill();
    return buffer_[pos_++];
  }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double phi = 2.0 * std::numbers::pi * uniform();
    cached_ = r * std::sin(phi);
    has_cached_ = true;
    return r * std::cos(phi);
  }

  /// Unit-rate exponential.
  double exponential() { return -std::log(uniform()); }

 private:
  void refill() {
    // Counter layout: {block, role, index_lo, index_hi}.
    const auto out =
        Philox4x32::apply({block_, role_, index_lo_, index_hi_}, key_);
    ++block_;
    buffer_[0] = (std::uint64_t{out[1]} << 32) | out[0];
    buffer_[1] = (std::uint64_t{out[3]} << 32) | out[2];
    pos_ = 0;
  }

  Philox4x32::Key key_;
  std::uint32_t index_lo_;
  std::uint32_t index_hi_;
  std::uint32_t role_;
  std::uint32_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int pos_ = 2;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace fkspin
