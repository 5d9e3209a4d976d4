#pragma once

#include "m2sdf/denoisers/trained.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace m2sdf::denoisers {

/// Copy that masks pixel (y, x): its position 2*(y%2) + (x%2) in the 2x2 cell.
inline int mask_copy_of(int y, int x) { return 2 * (y % 2) + (x % 2); }

/// Four copies; copy k replaces every pixel with mask_copy_of == k by the
/// mean of its in-image 4-neighbours, which are never masked in that copy.
/// Odd sizes need no padding: the last row or column simply has a partial cell.
struct MaskedVolume {
    std::array<Image, 4> copies;
    std::vector<std::uint8_t> mask_map;  // row-major copy index per pixel
};

MaskedVolume b2u_mask_volume(const Image& image);

/// out(p) = outputs[mask_map(p)](p). ArgumentError on inconsistent shapes.
Image b2u_remap(std::span<const Image> outputs, std::span<const std::uint8_t> mask_map);

struct B2UTerms {
    double blind = 0.0;    // mean (remap(f(volume)) - x)^2
    double visible = 0.0;  // mean (f(x) - detach(remap(f(volume))))^2
    double total = 0.0;    // blind + lambda_vis * visible
};

B2UTerms b2u_objective(const nnmodel::Model<float>& model, const Image& noisy, double lambda_vis,
                       std::span<float> grads = {}, double grad_scale = 1.0);

inline constexpr double kDefaultLambdaVis = 1.0;

/// Masked-volume blind-spot training with a fixed-weight visible term.
/// Inference uses f(x) directly.
TrainedDenoiser train_b2u(const std::vector<Image>& noisy_corpus, const noisegen::NoiseSpec& noise, double lambda_vis,
                          const TrainerOptions& options);

}  // namespace m2sdf::denoisers
