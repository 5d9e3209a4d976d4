#pragma once

#include <cmath>
#include <cstdint>

namespace m2sdf::noisegen {

template <typename UniformSource>
std::int64_t sample_poisson(double mean, UniformSource&& next_uniform) {
    if (mean <= 0.0) return 0;
    if (mean < 10.0) {
        const double limit = std::exp(-mean);
        std::int64_t k = 0;
        double prod = next_uniform();
        while (prod > limit) {
            ++k;
            prod *= next_uniform();
        }
        return k;
    }
    // Hoermann (1993) PTRS.
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = next_uniform() - 0.5;
        const double v = next_uniform();
        const double us = 0.5 - std::abs(u);
        if (us <= 0.0) continue;
        const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(k);
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -mean + k * loglam - std::lgamma(k + 1.0)) {
            return static_cast<std::int64_t>(k);
        }
    }
}

}  // namespace m2sdf::noisegen
