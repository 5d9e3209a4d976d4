#pragma once

#include "m2sdf/imagecore/image.hpp"
#include "m2sdf/util/aligned.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace m2sdf::nnmodel {

/// Channel-major C x H x W tensor.
template <typename T>
struct Volume {
    int channels = 0;
    int height = 0;
    int width = 0;
    util::AlignedVector<T> data;

    Volume() = default;
    Volume(int c, int h, int w, T fill = T(0))
        : channels(c), height(h), width(w), data(static_cast<std::size_t>(c) * h * w, fill) {}

    std::size_t plane() const noexcept { return static_cast<std::size_t>(height) * width; }
    T* channel(int c) noexcept { return data.data() + c * plane(); }
    const T* channel(int c) const noexcept { return data.data() + c * plane(); }

    template <typename U>
    Volume<U> cast() const {
        Volume<U> out(channels, height, width);
        for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
        return out;
    }
};

using Stack = Volume<float>;

/// Stacks same-sized frames as channels, in the given order.
Stack stack_images(std::span<const imagecore::Image> frames);
Stack stack_images(std::span<const imagecore::Image* const> frames);
Stack from_image(const imagecore::Image& image);

/// Channel 0 as an Image (values clamped into [0,1]).
imagecore::Image to_image(const Stack& volume);

}  // namespace m2sdf::nnmodel
