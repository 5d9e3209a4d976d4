#include "m2sdf/noisegen/noise.hpp"

#include "m2sdf/error.hpp"
#include "m2sdf/noisegen/counter_rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace m2sdf::noisegen {

namespace {

constexpr double kEightBit = 255.0;

bool is_gaussian(NoiseKind k) { return k == NoiseKind::GaussianFixed || k == NoiseKind::GaussianRange; }
bool is_poisson(NoiseKind k) { return k == NoiseKind::PoissonFixed || k == NoiseKind::PoissonRange; }

std::string format_param(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << v;
    return os.str();
}

}  // namespace

NoiseSpec NoiseSpec::gaussian(double sigma, std::uint64_t seed) { return {NoiseKind::GaussianFixed, sigma, {}, seed}; }
NoiseSpec NoiseSpec::gaussian_range(double lo, double hi, std::uint64_t seed) {
    return {NoiseKind::GaussianRange, lo, hi, seed};
}
NoiseSpec NoiseSpec::poisson(double lambda, std::uint64_t seed) { return {NoiseKind::PoissonFixed, lambda, {}, seed}; }
NoiseSpec NoiseSpec::poisson_range(double lo, double hi, std::uint64_t seed) {
    return {NoiseKind::PoissonRange, lo, hi, seed};
}
NoiseSpec NoiseSpec::speckle(double scale, std::uint64_t seed) { return {NoiseKind::Speckle, scale, {}, seed}; }
NoiseSpec NoiseSpec::unit_speckle(std::uint64_t seed) { return speckle(std::sqrt(2.0 / std::numbers::pi), seed); }

void NoiseSpec::validate() const {
    if (!std::isfinite(param1) || (param2 && !std::isfinite(*param2))) throw ArgumentError("noise parameters must be finite");
    switch (kind) {
        case NoiseKind::GaussianFixed:
        case NoiseKind::PoissonFixed:
        case NoiseKind::Speckle:
            if (param1 <= 0.0) throw ArgumentError(kind_name(kind) + ": param1 must be > 0");
            if (param2) throw ArgumentError(kind_name(kind) + ": param2 must be absent");
            break;
        case NoiseKind::GaussianRange:
        case NoiseKind::PoissonRange:
            if (!param2 || !(0.0 < param1 && param1 < *param2)) {
                throw ArgumentError(kind_name(kind) + ": requires 0 < param1 < param2");
            }
            break;
    }
}

std::string kind_name(NoiseKind kind) {
    switch (kind) {
        case NoiseKind::GaussianFixed: return "gaussian-fixed";
        case NoiseKind::GaussianRange: return "gaussian-range";
        case NoiseKind::PoissonFixed: return "poisson-fixed";
        case NoiseKind::PoissonRange: return "poisson-range";
        case NoiseKind::Speckle: return "speckle";
    }
    return "unknown";
}

NoiseKind parse_kind_name(const std::string& name) {
    for (auto k : {NoiseKind::GaussianFixed, NoiseKind::GaussianRange, NoiseKind::PoissonFixed, NoiseKind::PoissonRange,
                   NoiseKind::Speckle}) {
        if (kind_name(k) == name) return k;
    }
    throw ArgumentError("unknown noise kind '" + name + "'");
}

std::string noise_label(const NoiseSpec& spec) {
    switch (spec.kind) {
        case NoiseKind::GaussianFixed: return "g" + format_param(spec.param1);
        case NoiseKind::GaussianRange: return "g" + format_param(spec.param1) + "-" + format_param(spec.param2.value_or(0));
        case NoiseKind::PoissonFixed: return "p" + format_param(spec.param1);
        case NoiseKind::PoissonRange: return "p" + format_param(spec.param1) + "-" + format_param(spec.param2.value_or(0));
        case NoiseKind::Speckle: return "speckle";
    }
    return "unknown";
}

NoiseSpec parse_noise_label(const std::string& label, std::uint64_t seed) {
    if (label == "g25") return NoiseSpec::gaussian(25.0, seed);
    if (label == "g5-50") return NoiseSpec::gaussian_range(5.0, 50.0, seed);
    if (label == "p30") return NoiseSpec::poisson(30.0, seed);
    if (label == "p5-50") return NoiseSpec::poisson_range(5.0, 50.0, seed);
    if (label == "speckle") return NoiseSpec::unit_speckle(seed);
    throw ArgumentError("invalid noise label '" + label + "' (expected one of: g25, g5-50, p30, p5-50, speckle)");
}

double effective_parameter(const NoiseSpec& spec, std::uint64_t image_index) {
    spec.validate();
    if (spec.kind != NoiseKind::GaussianRange && spec.kind != NoiseKind::PoissonRange) return spec.param1;
    const CounterRng rng(spec.seed, Domain::NoiseParameter, image_index);
    return spec.param1 + (*spec.param2 - spec.param1) * rng.uniform(0);
}

std::vector<double> noisy_unclamped(const Image& image, const NoiseSpec& spec, std::uint64_t image_index) {
    const double param = effective_parameter(spec, image_index);
    const CounterRng rng(spec.seed, Domain::NoisePixels, image_index);
    const auto px = image.pixels();
    std::vector<double> out(px.size());

    if (is_gaussian(spec.kind)) {
        const double sigma = param / kEightBit;
        for (std::size_t i = 0; i < px.size(); ++i) out[i] = px[i] + sigma * rng.normal(i);
    } else if (is_poisson(spec.kind)) {
        for (std::size_t i = 0; i < px.size(); ++i) {
            UniformSequence seq(rng, i);
            out[i] = static_cast<double>(sample_poisson(param * px[i], [&] { return seq.next(); })) / param;
        }
    } else {
        for (std::size_t i = 0; i < px.size(); ++i) {
            const double u = rng.uniform(i);
            out[i] = px[i] * param * std::sqrt(-2.0 * std::log1p(-u));
        }
    }
    return out;
}

namespace {

Image clamp_to_image(const Image& like, const std::vector<double>& values) {
    std::vector<float> data(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) data[i] = static_cast<float>(std::clamp(values[i], 0.0, 1.0));
    return Image(like.height(), like.width(), std::move(data));
}

}  // namespace

Image add_gaussian(const Image& image, const NoiseSpec& spec, std::uint64_t image_index) {
    if (!is_gaussian(spec.kind)) throw ArgumentError("add_gaussian: spec kind is " + kind_name(spec.kind));
    return clamp_to_image(image, noisy_unclamped(image, spec, image_index));
}

Image add_poisson(const Image& image, const NoiseSpec& spec, std::uint64_t image_index) {
    if (!is_poisson(spec.kind)) throw ArgumentError("add_poisson: spec kind is " + kind_name(spec.kind));
    return clamp_to_image(image, noisy_unclamped(image, spec, image_index));
}

Image add_speckle(const Image& image, const NoiseSpec& spec, std::uint64_t image_index) {
    if (spec.kind != NoiseKind::Speckle) throw ArgumentError("add_speckle: spec kind is " + kind_name(spec.kind));
    return clamp_to_image(image, noisy_unclamped(image, spec, image_index));
}

Image apply_noise(const Image& image, const NoiseSpec& spec, std::uint64_t image_index) {
    if (is_gaussian(spec.kind)) return add_gaussian(image, spec, image_index);
    if (is_poisson(spec.kind)) return add_poisson(image, spec, image_index);
    return add_speckle(image, spec, image_index);
}

NoiseCycle NoiseCycle::parse(const std::string& label, std::uint64_t seed) {
    if (label == "mixed") return {{NoiseSpec::gaussian(25.0, seed), NoiseSpec::unit_speckle(seed)}};
    try {
        return {{parse_noise_label(label, seed)}};
    } catch (const ArgumentError&) {
        throw ArgumentError("invalid noise label '" + label + "' (expected one of: g25, g5-50, p30, p5-50, speckle, mixed)");
    }
}

std::string NoiseCycle::label() const {
    if (specs.size() == 1) return noise_label(specs.front());
    std::string out;
    for (const auto& s : specs) out += (out.empty() ? "" : "+") + noise_label(s);
    return out;
}

const NoiseSpec& NoiseCycle::spec_for(std::uint64_t index) const {
    if (specs.empty()) throw ArgumentError("noise cycle is empty");
    return specs[index % specs.size()];
}

Image NoiseCycle::observe(const Image& clean, std::uint64_t index) const {
    const NoiseSpec& s = spec_for(index);
    return apply_noise(clean, s.with_seed(s.seed + index), index);
}

}  // namespace m2sdf::noisegen
