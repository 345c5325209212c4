#pragma once

#include <array>
#include <cstdint>

namespace eulerlab::rng {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Output is a
/// pure function of (counter, key); no state is carried between calls.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static constexpr Counter generate(Counter ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }
};

/// Logical substreams; each occupies a disjoint region of counter space.
enum class Stream : std::uint32_t { increments = 0, initial = 1, sampling = 2 };

/// Two uniforms in (0,1), 53-bit resolution, keyed by
/// (seed, stream, index, step, block).
inline std::array<double, 2> uniform_pair(std::uint64_t seed, Stream stream, std::uint64_t index,
                                          std::uint64_t step, std::uint32_t block) {
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    // step uses 48 bits; block 12 bits; stream 4 bits
    const Philox4x32::Counter ctr{
        static_cast<std::uint32_t>(step),
        static_cast<std::uint32_t>((step >> 32) & 0xFFFFu) | ((block & 0xFFFu) << 16) |
            (static_cast<std::uint32_t>(stream) << 28),
        static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    const auto out = Philox4x32::generate(ctr, key);
    auto to_unit = [](std::uint32_t hi, std::uint32_t lo) {
        const std::uint64_t bits = (std::uint64_t{hi} << 21) ^ (std::uint64_t{lo} >> 11);  // 53 bits
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    };
    return {to_unit(out[0], out[1]), to_unit(out[2], out[3])};
}

/// Uniform in (0,1) for scalar component `comp` at (index, step).
inline double uniform(std::uint64_t seed, Stream stream, std::uint64_t index, std::uint64_t step,
                      std::uint32_t comp) {
    return uniform_pair(seed, stream, index, step, comp / 2)[comp % 2];
}

}  // namespace eulerlab::rng
