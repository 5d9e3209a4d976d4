#pragma once

#include "m2sdf/imagecore/image.hpp"

#include <filesystem>

namespace m2sdf::imagecore {

/// Reads an 8/16-bit PNG or binary PGM (P5). Colour PNGs are reduced to luma
/// (0.299 R + 0.587 G + 0.114 B); alpha is ignored. Intensities are divided
/// by the format maximum (255, 65535 or the PGM maxval).
Image load_image(const std::filesystem::path& path);

/// Writes an 8-bit grayscale PNG with byte = floor(v * 255 + 0.5).
void save_image(const Image& image, const std::filesystem::path& path);

/// Byte value stored by save_image for one intensity.
unsigned char quantize_8bit(float intensity) noexcept;

}  // namespace m2sdf::imagecore
