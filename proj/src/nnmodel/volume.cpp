#include "m2sdf/nnmodel/volume.hpp"

#include "m2sdf/error.hpp"

#include <algorithm>

namespace m2sdf::nnmodel {

Stack stack_images(std::span<const imagecore::Image* const> frames) {
    if (frames.empty()) throw ArgumentError("cannot stack zero frames");
    const int h = frames[0]->height();
    const int w = frames[0]->width();
    Stack out(static_cast<int>(frames.size()), h, w);
    for (std::size_t c = 0; c < frames.size(); ++c) {
        if (frames[c]->height() != h || frames[c]->width() != w) throw ArgumentError("stacked frames differ in size");
        const auto px = frames[c]->pixels();
        std::copy(px.begin(), px.end(), out.channel(static_cast<int>(c)));
    }
    return out;
}

Stack stack_images(std::span<const imagecore::Image> frames) {
    std::vector<const imagecore::Image*> ptrs;
    ptrs.reserve(frames.size());
    for (const auto& f : frames) ptrs.push_back(&f);
    return stack_images(std::span<const imagecore::Image* const>(ptrs));
}

Stack from_image(const imagecore::Image& image) {
    const imagecore::Image* p = &image;
    return stack_images(std::span<const imagecore::Image* const>(&p, 1));
}

imagecore::Image to_image(const Stack& volume) {
    if (volume.channels < 1) throw ArgumentError("empty volume");
    std::vector<float> px(volume.channel(0), volume.channel(0) + volume.plane());
    // non-finite values are left for Image to reject
    for (auto& v : px) v = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
    return imagecore::Image(volume.height, volume.width, std::move(px));
}

}  // namespace m2sdf::nnmodel
