#include "m2sdf/noisegen/counter_rng.hpp"

#include <cmath>
#include <numbers>
#include <utility>

namespace m2sdf::noisegen {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline double to_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, Domain domain, std::uint64_t index) noexcept {
    const std::uint64_t k = mix64(mix64(mix64(seed) ^ static_cast<std::uint64_t>(domain)) ^ index);
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

std::array<std::uint32_t, 4> CounterRng::block(std::uint64_t hi, std::uint64_t lo) const noexcept {
    return philox4x32({static_cast<std::uint32_t>(lo), static_cast<std::uint32_t>(lo >> 32),
                       static_cast<std::uint32_t>(hi), static_cast<std::uint32_t>(hi >> 32)},
                      key_);
}

std::array<double, 2> CounterRng::uniform_pair(std::uint64_t hi, std::uint64_t lo) const noexcept {
    const auto b = block(hi, lo);
    return {to_unit(b[0], b[1]), to_unit(b[2], b[3])};
}

double CounterRng::normal(std::uint64_t hi, std::uint64_t lo) const noexcept {
    const auto u = uniform_pair(hi, lo);
    const double radius = std::sqrt(-2.0 * std::log1p(-u[0]));  // 1 - u0 lies in (0, 1]
    return radius * std::cos(2.0 * std::numbers::pi * u[1]);
}

std::uint64_t CounterRng::below(std::uint64_t bound, std::uint64_t hi, std::uint64_t lo) const noexcept {
    const auto b = block(hi, lo);
    const std::uint64_t bits = (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(bits) * bound) >> 64);
}

std::vector<std::size_t> permutation(std::size_t n, const CounterRng& rng, std::uint64_t hi) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.below(i, hi, i - 1));
        std::swap(p[i - 1], p[j]);
    }
    return p;
}

double UniformSequence::next() noexcept {
    if (available_ == 0) {
        buffer_ = rng_.uniform_pair(position_, draw_++);
        available_ = 2;
    }
    return buffer_[2 - available_--];
}

}  // namespace m2sdf::noisegen
