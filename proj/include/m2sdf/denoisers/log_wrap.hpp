#pragma once

#include "m2sdf/denoisers/registry.hpp"

namespace m2sdf::denoisers {

inline constexpr double kLogEpsilon = 1e-3;

/// Log-domain wrapper for multiplicative noise. The inner denoiser sees
/// u = (log(x+eps) - log eps) / (log(1+eps) - log eps), which maps [0,1]
/// onto [0,1]; its output is mapped back through exp(.) - eps and clamped.
/// Named "log:" + inner.name.
DenoiserHandle log_domain_wrap(DenoiserHandle inner);

}  // namespace m2sdf::denoisers
