#include "m2sdf/imagecore/image.hpp"

#include "m2sdf/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace m2sdf::imagecore {

namespace {

void check_dims(int height, int width) {
    if (height < 1 || width < 1) {
        throw ArgumentError("image dimensions must be positive, got " + std::to_string(height) + "x" +
                            std::to_string(width));
    }
}

}  // namespace

Image::Image(int height, int width, float fill) {
    check_dims(height, width);
    if (!std::isfinite(fill)) throw ArgumentError("image fill value is not finite");
    height_ = height;
    width_ = width;
    data_.assign(static_cast<std::size_t>(height) * width, std::clamp(fill, 0.0f, 1.0f));
}

Image::Image(int height, int width, std::vector<float> data) {
    check_dims(height, width);
    if (data.size() != static_cast<std::size_t>(height) * width) {
        throw ArgumentError("image data length " + std::to_string(data.size()) + " does not match " +
                            std::to_string(height) + "x" + std::to_string(width));
    }
    for (float& v : data) {
        if (!std::isfinite(v)) throw ArgumentError("image contains a non-finite intensity");
        v = std::clamp(v, 0.0f, 1.0f);
    }
    height_ = height;
    width_ = width;
    data_ = std::move(data);
}

double mean_intensity(const Image& image) {
    const auto px = image.pixels();
    if (px.empty()) return 0.0;
    return std::accumulate(px.begin(), px.end(), 0.0) / static_cast<double>(px.size());
}

}  // namespace m2sdf::imagecore
