#pragma once

#include "m2sdf/imagecore/image.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace m2sdf::noisegen {

using imagecore::Image;

enum class NoiseKind { GaussianFixed, GaussianRange, PoissonFixed, PoissonRange, Speckle };

/// One noise regime. Gaussian sigma and Poisson lambda use the 8-bit
/// convention (sigma = 25 means 25/255 on the unit scale); speckle param1 is
/// the Rayleigh scale of the multiplier.
struct NoiseSpec {
    NoiseKind kind = NoiseKind::GaussianFixed;
    double param1 = 25.0;
    std::optional<double> param2;
    std::uint64_t seed = 0;

    static NoiseSpec gaussian(double sigma, std::uint64_t seed = 0);
    static NoiseSpec gaussian_range(double lo, double hi, std::uint64_t seed = 0);
    static NoiseSpec poisson(double lambda, std::uint64_t seed = 0);
    static NoiseSpec poisson_range(double lo, double hi, std::uint64_t seed = 0);
    static NoiseSpec speckle(double scale, std::uint64_t seed = 0);
    /// Rayleigh scale sqrt(2/pi), giving a unit-mean multiplier.
    static NoiseSpec unit_speckle(std::uint64_t seed = 0);

    /// Throws ArgumentError when the parameters violate the kind's invariants.
    void validate() const;

    NoiseSpec with_seed(std::uint64_t s) const {
        NoiseSpec copy = *this;
        copy.seed = s;
        return copy;
    }

    friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

/// Short label used in handle names: "g25", "g5-50", "p30", "p5-50", "speckle".
std::string noise_label(const NoiseSpec& spec);

/// Inverse of noise_label for the four training regimes plus "speckle"
/// (unit speckle). Throws ArgumentError listing the accepted labels.
NoiseSpec parse_noise_label(const std::string& label, std::uint64_t seed = 0);

std::string kind_name(NoiseKind kind);
NoiseKind parse_kind_name(const std::string& name);

/// Noise parameter used for image `image_index`: the fixed value, or a
/// per-image uniform draw from [param1, param2] for range kinds.
double effective_parameter(const NoiseSpec& spec, std::uint64_t image_index = 0);

/// Noisy intensities before the [0,1] clamp. The add_* functions below are
/// exactly this followed by clamping.
std::vector<double> noisy_unclamped(const Image& image, const NoiseSpec& spec, std::uint64_t image_index = 0);

/// y = clamp(x + n), n ~ N(0, (sigma/255)^2) per pixel.
Image add_gaussian(const Image& image, const NoiseSpec& spec, std::uint64_t image_index = 0);

/// y = clamp(Poisson(lambda x) / lambda).
Image add_poisson(const Image& image, const NoiseSpec& spec, std::uint64_t image_index = 0);

/// y = clamp(x r), r ~ Rayleigh(scale).
Image add_speckle(const Image& image, const NoiseSpec& spec, std::uint64_t image_index = 0);

Image apply_noise(const Image& image, const NoiseSpec& spec, std::uint64_t image_index = 0);

/// Noise for a test set: image i uses cycle[i % size] re-seeded with
/// seed + i. A one-element cycle is a plain regime.
struct NoiseCycle {
    std::vector<NoiseSpec> specs;

    /// Any noise label, or "mixed": g25 on even indices, unit speckle on odd.
    static NoiseCycle parse(const std::string& label, std::uint64_t seed = 0);
    std::string label() const;
    const NoiseSpec& spec_for(std::uint64_t index) const;
    Image observe(const Image& clean, std::uint64_t index) const;
};

/// Poisson variate for one mean, consuming uniforms from `next_uniform`.
/// Multiplication method below mean 10, PTRS transformed rejection above.
template <typename UniformSource>
std::int64_t sample_poisson(double mean, UniformSource&& next_uniform);

}  // namespace m2sdf::noisegen

#include "m2sdf/noisegen/poisson_impl.hpp"
