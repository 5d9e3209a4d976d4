#pragma once

#include "m2sdf/imagecore/image.hpp"

namespace m2sdf::imagecore {

/// Value returned by psnr() for identical images.
inline constexpr double kPsnrCapDb = 100.0;

inline constexpr int kSsimWindow = 8;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

double mse(const Image& a, const Image& b);

/// 10 log10(1 / MSE) on the unit intensity scale, capped at kPsnrCapDb.
double psnr(const Image& a, const Image& b);

/// Mean SSIM over all 8x8 windows (stride 1, uniform weights, population
/// moments). Both images must be at least 8x8.
double ssim(const Image& a, const Image& b);

}  // namespace m2sdf::imagecore
