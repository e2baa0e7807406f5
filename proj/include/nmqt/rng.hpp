// Copyright 2026 The nmqtraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace nmqt {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Chosen over
// std::mt19937 because trajectory streams must be (a) cheap to construct by
// the thousand, (b) statistically independent by construction, and (c)
// identical no matter which worker thread consumes them. The key is the run
// seed; the high counter words select the stream (trajectory index), the low
// counter words enumerate blocks within the stream.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;

  Philox4x32(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_lo_(static_cast<std::uint32_t>(stream)),
        stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

  // Generates the 128-bit block for the given block index.
  Block block(std::uint64_t index) const noexcept {
    Block ctr{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
              stream_lo_, stream_hi_};
    std::uint32_t k0 = key_[0];
    std::uint32_t k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        k0 += 0x9E3779B9u;  // Weyl sequence key schedule
        k1 += 0xBB67AE85u;
      }
      const std::uint64_t p0 = 0xD2511F53ull * ctr[0];
      const std::uint64_t p1 = 0xCD9E8D57ull * ctr[2];
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      ctr = Block{hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
    }
    return ctr;
  }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_lo_;
  std::uint32_t stream_hi_;
};

// One trajectory's private random stream: uniform doubles and Gaussian
// variates drawn in a fixed serial order. Two streams with different
// (seed, stream) pairs are independent; the same pair replays identically.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream) noexcept : gen_(seed, stream) {}

  std::uint32_t next_u32() noexcept {
    if (pos_ == 4) {
      buffer_ = gen_.block(block_index_++);
      pos_ = 0;
    }
    return buffer_[pos_++];
  }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; generates pairs, caches the second.
  double next_gaussian() noexcept {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = 1.0 - next_double();  // (0, 1], keeps log finite
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

  // Complex Gaussian g1 + i*g2 with independent standard normal parts,
  // i.e. E[z] = 0, E[z^2] = 0, E[|z|^2] = 2.
  std::complex<double> next_complex_gaussian() noexcept {
    const double re = next_gaussian();
    const double im = next_gaussian();
    return {re, im};
  }

 private:
  Philox4x32 gen_;
  Philox4x32::Block buffer_{};
  std::uint64_t block_index_ = 0;
  int pos_ = 4;  // forces refill on first use
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace nmqt
