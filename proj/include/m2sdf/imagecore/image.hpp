#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace m2sdf::imagecore {

/// Single-channel image with row-major float intensities in [0,1].
///
/// Values are clamped into [0,1] when the image is constructed; non-finite
/// values are rejected. Once built an Image is never modified in place, so
/// instances can be shared freely between threads.
class Image {
public:
    Image() = default;

    /// Constant image.
    Image(int height, int width, float fill = 0.0f);

    /// Takes ownership of `data` (length must equal height * width).
    Image(int height, int width, std::vector<float> data);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    float at(int y, int x) const noexcept { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    std::span<const float> pixels() const& noexcept { return data_; }
    std::span<const float> pixels() const&& = delete;  // would dangle

    bool same_shape(const Image& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }

    friend bool operator==(const Image&, const Image&) = default;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<float> data_;
};

/// Arithmetic mean of all intensities.
double mean_intensity(const Image& image);

}  // namespace m2sdf::imagecore
