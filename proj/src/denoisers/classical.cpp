#include "m2sdf/denoisers/classical.hpp"

#include "m2sdf/denoisers/log_wrap.hpp"
#include "m2sdf/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace m2sdf::denoisers {

namespace {

int clamp_index(int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); }

std::string format_sigma(double sigma) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << sigma;
    return os.str();
}

}  // namespace

Image median_filter(const Image& image, int radius) {
    if (radius < 1) throw ArgumentError("median radius must be >= 1");
    const int h = image.height(), w = image.width();
    const int side = 2 * radius + 1;
    std::vector<float> window(static_cast<std::size_t>(side) * side);
    std::vector<float> out(image.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::size_t n = 0;
            for (int dy = -radius; dy <= radius; ++dy) {
                for (int dx = -radius; dx <= radius; ++dx) {
                    window[n++] = image.at(clamp_index(y + dy, h), clamp_index(x + dx, w));
                }
            }
            auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
            std::nth_element(window.begin(), mid, window.end());
            out[static_cast<std::size_t>(y) * w + x] = *mid;
        }
    }
    return Image(h, w, std::move(out));
}

Image gaussian_filter(const Image& image, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ArgumentError("gaussian sigma must be > 0");
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double total = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        total += kernel[i + radius];
    }
    for (auto& k : kernel) k /= total;

    const int h = image.height(), w = image.width();
    std::vector<double> tmp(image.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int i = -radius; i <= radius; ++i) s += kernel[i + radius] * image.at(y, clamp_index(x + i, w));
            tmp[static_cast<std::size_t>(y) * w + x] = s;
        }
    }
    std::vector<float> out(image.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                s += kernel[i + radius] * tmp[static_cast<std::size_t>(clamp_index(y + i, h)) * w + x];
            }
            out[static_cast<std::size_t>(y) * w + x] = static_cast<float>(s);
        }
    }
    return Image(h, w, std::move(out));
}

DenoiserHandle identity_handle() {
    return {"identity", HandleKind::Classical, [](const Image& x) { return x; }, {{"filter", "identity"}}};
}

DenoiserHandle median_handle(int radius) {
    if (radius < 1) throw ArgumentError("median radius must be >= 1");
    return {"median" + std::to_string(2 * radius + 1), HandleKind::Classical,
            [radius](const Image& x) { return median_filter(x, radius); },
            {{"filter", "median"}, {"radius", radius}}};
}

DenoiserHandle gaussian_handle(double sigma) {
    if (!(sigma > 0.0)) throw ArgumentError("gaussian sigma must be > 0");
    return {"gaussian" + format_sigma(sigma), HandleKind::Classical,
            [sigma](const Image& x) { return gaussian_filter(x, sigma); },
            {{"filter", "gaussian"}, {"sigma", sigma}}};
}

Registry builtin_registry() {
    Registry r;
    r.register_handle(identity_handle());
    r.register_handle(median_handle(1));
    r.register_handle(gaussian_handle(1.0));
    r.register_handle(log_domain_wrap(gaussian_handle(1.0)));
    return r;
}

}  // namespace m2sdf::denoisers
