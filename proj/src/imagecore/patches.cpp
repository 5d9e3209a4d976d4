#include "m2sdf/imagecore/patches.hpp"

#include "m2sdf/error.hpp"

#include <algorithm>
#include <string>

namespace m2sdf::imagecore {

namespace {

void validate(const Image& image, const PatchSpec& spec) {
    if (spec.size < 1 || spec.size > std::min(image.height(), image.width())) {
        throw ArgumentError("patch size " + std::to_string(spec.size) + " does not fit a " +
                            std::to_string(image.height()) + "x" + std::to_string(image.width()) + " image");
    }
    if (spec.stride < 1 || spec.stride > spec.size) {
        throw ArgumentError("patch stride must be in [1, size], got " + std::to_string(spec.stride));
    }
}

}  // namespace

int patch_count_along(int extent, const PatchSpec& spec) { return (extent - spec.size) / spec.stride + 1; }

Image crop(const Image& image, int y, int x, int height, int width) {
    if (y < 0 || x < 0 || height < 1 || width < 1 || y + height > image.height() || x + width > image.width()) {
        throw ArgumentError("crop window outside image");
    }
    std::vector<float> out(static_cast<std::size_t>(height) * width);
    for (int r = 0; r < height; ++r) {
        const auto src = image.pixels().subspan(static_cast<std::size_t>(y + r) * image.width() + x, width);
        std::copy(src.begin(), src.end(), out.begin() + static_cast<std::ptrdiff_t>(r) * width);
    }
    return Image(height, width, std::move(out));
}

std::vector<Image> to_patches(const Image& image, const PatchSpec& spec) {
    validate(image, spec);
    const int rows = patch_count_along(image.height(), spec);
    const int cols = patch_count_along(image.width(), spec);
    std::vector<Image> patches;
    patches.reserve(static_cast<std::size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) patches.push_back(crop(image, r * spec.stride, c * spec.stride, spec.size, spec.size));
    }
    return patches;
}

Image from_patches(const std::vector<Image>& patches, int rows, int cols) {
    if (rows < 1 || cols < 1 || patches.size() != static_cast<std::size_t>(rows) * cols) {
        throw ArgumentError("patch grid does not match patch count");
    }
    const int size = patches.front().height();
    for (const auto& p : patches) {
        if (p.height() != size || p.width() != size) throw ArgumentError("patches must be square and equal-sized");
    }
    const int width = cols * size;
    std::vector<float> out(static_cast<std::size_t>(rows) * size * width);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const Image& p = patches[static_cast<std::size_t>(r) * cols + c];
            for (int y = 0; y < size; ++y) {
                const auto src = p.pixels().subspan(static_cast<std::size_t>(y) * size, size);
                std::copy(src.begin(), src.end(),
                          out.begin() + (static_cast<std::ptrdiff_t>(r) * size + y) * width + c * size);
            }
        }
    }
    return Image(rows * size, width, std::move(out));
}

}  // namespace m2sdf::imagecore
