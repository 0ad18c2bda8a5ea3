// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>

namespace atomdiode {

/// Philox4x32-10 block function (Salmon et al., SC'11).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u;
    constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

/// Counter-based stream: draw i of stream s under master seed m is a pure
/// function of (m, s, i), so trajectories can run in any order on any worker.
class CounterRng {
public:
    CounterRng(std::uint64_t master_seed, std::uint64_t stream) : seed_(master_seed), stream_(stream) {}

    /// Uniform in the open interval (0, 1), 53-bit resolution.
    double uniform() {
        const auto block = philox4x32(
            {static_cast<std::uint32_t>(index_), static_cast<std::uint32_t>(index_ >> 32),
             static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
            {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
        ++index_;
        const std::uint64_t bits = (std::uint64_t{block[0]} << 21) ^ (std::uint64_t{block[1]} >> 11);
        const std::uint64_t mant = bits & ((std::uint64_t{1} << 53) - 1);
        return (static_cast<double>(mant) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t draws() const { return index_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t index_ = 0;
};

}  // namespace atomdiode
