#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace m2sdf::noisegen {

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key) noexcept;

/// SplitMix64 finaliser; used to fold several 64-bit words into one key.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Purpose tags so that independent consumers of one seed never share
/// random streams.
enum class Domain : std::uint64_t {
    NoisePixels = 1,
    NoiseParameter = 2,
    Phantom = 3,
    Partition = 4,
    WeightInit = 5,
    BatchOrder = 6,
    Subsample = 7,
    Sampling = 8,
};

/// Counter-based generator keyed by (seed, domain, index). Every value is a
/// pure function of its key and a 128-bit counter, so results do not depend
/// on call order or thread count.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, Domain domain, std::uint64_t index = 0) noexcept;

    std::array<std::uint32_t, 4> block(std::uint64_t hi, std::uint64_t lo) const noexcept;

    /// Two uniforms in [0,1) with 53-bit resolution from one block.
    std::array<double, 2> uniform_pair(std::uint64_t hi, std::uint64_t lo) const noexcept;

    double uniform(std::uint64_t hi, std::uint64_t lo = 0) const noexcept { return uniform_pair(hi, lo)[0]; }

    /// Standard normal via Box-Muller on one block.
    double normal(std::uint64_t hi, std::uint64_t lo = 0) const noexcept;

    /// Uniform integer in [0, bound) by rejection-free multiply-shift on 64 bits.
    std::uint64_t below(std::uint64_t bound, std::uint64_t hi, std::uint64_t lo = 0) const noexcept;

private:
    std::array<std::uint32_t, 2> key_;
};

/// Fisher-Yates permutation of [0, n) drawn from counters (hi, 0..n-1).
std::vector<std::size_t> permutation(std::size_t n, const CounterRng& rng, std::uint64_t hi);

/// Sequential view over the counters (position, 0), (position, 1), ...
/// for consumers that need a variable number of draws per item.
class UniformSequence {
public:
    UniformSequence(const CounterRng& rng, std::uint64_t position) noexcept : rng_(rng), position_(position) {}

    double next() noexcept;

private:
    const CounterRng& rng_;
    std::uint64_t position_;
    std::uint64_t draw_ = 0;
    std::array<double, 2> buffer_{};
    int available_ = 0;
};

}  // namespace m2sdf::noisegen
