#include "m2sdf/imagecore/metrics.hpp"

#include "m2sdf/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace m2sdf::imagecore {

namespace {

void require_same_shape(const Image& a, const Image& b, const char* what) {
    if (!a.same_shape(b)) {
        throw ArgumentError(std::string(what) + ": dimension mismatch " + std::to_string(a.height()) + "x" +
                            std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                            std::to_string(b.width()));
    }
}

/// Summed-area table with a zero row/column in front.
class Integral {
public:
    template <typename F>
    Integral(int h, int w, F&& value) : w_(w + 1), t_(static_cast<std::size_t>(h + 1) * (w + 1), 0.0) {
        for (int y = 0; y < h; ++y) {
            double row = 0.0;
            for (int x = 0; x < w; ++x) {
                row += value(y, x);
                t_[idx(y + 1, x + 1)] = t_[idx(y, x + 1)] + row;
            }
        }
    }

    double box(int y, int x, int n) const {
        return t_[idx(y + n, x + n)] - t_[idx(y, x + n)] - t_[idx(y + n, x)] + t_[idx(y, x)];
    }

private:
    std::size_t idx(int y, int x) const { return static_cast<std::size_t>(y) * w_ + x; }
    int w_;
    std::vector<double> t_;
};

}  // namespace

double mse(const Image& a, const Image& b) {
    require_same_shape(a, b, "mse");
    const auto pa = a.pixels();
    const auto pb = b.pixels();
    double acc = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        const double d = static_cast<double>(pa[i]) - pb[i];
        acc += d * d;
    }
    return acc / static_cast<double>(pa.size());
}

double psnr(const Image& a, const Image& b) {
    require_same_shape(a, b, "psnr");
    const double err = mse(a, b);
    if (err <= 0.0) return kPsnrCapDb;
    return std::min(kPsnrCapDb, 10.0 * std::log10(1.0 / err));
}

double ssim(const Image& a, const Image& b) {
    require_same_shape(a, b, "ssim");
    const int h = a.height();
    const int w = a.width();
    const int n = kSsimWindow;
    if (h < n || w < n) throw ArgumentError("ssim: image smaller than the 8x8 window");

    const Integral sa(h, w, [&](int y, int x) { return static_cast<double>(a.at(y, x)); });
    const Integral sb(h, w, [&](int y, int x) { return static_cast<double>(b.at(y, x)); });
    const Integral saa(h, w, [&](int y, int x) { return static_cast<double>(a.at(y, x)) * a.at(y, x); });
    const Integral sbb(h, w, [&](int y, int x) { return static_cast<double>(b.at(y, x)) * b.at(y, x); });
    const Integral sab(h, w, [&](int y, int x) { return static_cast<double>(a.at(y, x)) * b.at(y, x); });

    const double inv = 1.0 / (n * n);
    double total = 0.0;
    long count = 0;
    for (int y = 0; y + n <= h; ++y) {
        for (int x = 0; x + n <= w; ++x) {
            const double ma = sa.box(y, x, n) * inv;
            const double mb = sb.box(y, x, n) * inv;
            const double va = saa.box(y, x, n) * inv - ma * ma;
            const double vb = sbb.box(y, x, n) * inv - mb * mb;
            const double cov = sab.box(y, x, n) * inv - ma * mb;
            const double num = (2.0 * ma * mb + kSsimC1) * (2.0 * cov + kSsimC2);
            const double den = (ma * ma + mb * mb + kSsimC1) * (va + vb + kSsimC2);
            total += num / den;
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

}  // namespace m2sdf::imagecore
