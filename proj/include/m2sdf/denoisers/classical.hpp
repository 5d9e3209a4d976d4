#pragma once

#include "m2sdf/denoisers/registry.hpp"

namespace m2sdf::denoisers {

/// (2r+1)^2 window median with edge replication. ArgumentError for r < 1.
Image median_filter(const Image& image, int radius);

/// Separable Gaussian, kernel radius ceil(3 sigma), renormalised, edge
/// replication. ArgumentError for sigma <= 0.
Image gaussian_filter(const Image& image, double sigma);

DenoiserHandle identity_handle();
DenoiserHandle median_handle(int radius);       // "median3" for radius 1
DenoiserHandle gaussian_handle(double sigma);   // "gaussian1" for sigma 1

/// identity, median3, gaussian1 and log:gaussian1.
Registry builtin_registry();

}  // namespace m2sdf::denoisers
