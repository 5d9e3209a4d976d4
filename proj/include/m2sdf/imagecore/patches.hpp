#pragma once

#include "m2sdf/imagecore/image.hpp"

#include <vector>

namespace m2sdf::imagecore {

/// Square patch grid: 1 <= size <= min(H, W), 1 <= stride <= size.
struct PatchSpec {
    int size = 64;
    int stride = 64;
};

/// Number of patches along one axis of length `extent`.
int patch_count_along(int extent, const PatchSpec& spec);

/// Cuts patches in row-major scan order. Trailing pixels that do not fill a
/// whole patch are dropped.
std::vector<Image> to_patches(const Image& image, const PatchSpec& spec);

/// Inverse of to_patches for stride == size: pastes patches back onto a
/// canvas of the covered extent (patch_count * size along each axis).
Image from_patches(const std::vector<Image>& patches, int rows, int cols);

/// Sub-image starting at (y, x).
Image crop(const Image& image, int y, int x, int height, int width);

}  // namespace m2sdf::imagecore
