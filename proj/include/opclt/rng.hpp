// Copyright 2026 The opclt Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace opclt {

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer; used for hashing stream coordinates.
std::uint64_t mix64(std::uint64_t z);

/// Counter-based random stream. Draw j is a pure function of
/// (master_seed, stream_index, j): the seed is the Philox key and the
/// 128-bit counter is (j / 2, stream_index).
class RngStream
{
  public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
        : seed_(master_seed), index_(stream_index)
    {
    }

    /// Stream for one replicate of one grid point of one suite.
    static RngStream derive(std::uint64_t master_seed, std::string_view tag, std::uint64_t n,
                            std::uint64_t replicate);

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Standard normal via Box-Muller (consumes two draws).
    double normal();

    std::uint64_t master_seed() const { return seed_; }
    std::uint64_t stream_index() const { return index_; }
    std::uint64_t draw_counter() const { return counter_; }

  private:
    std::uint64_t seed_;
    std::uint64_t index_;
    std::uint64_t counter_ = 0;
    std::uint64_t cached_block_ = ~std::uint64_t{0};
    std::array<std::uint32_t, 4> block_{};
};

}  // namespace opclt
