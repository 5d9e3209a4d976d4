#pragma once

#include "m2sdf/denoisers/trained.hpp"

#include <span>

namespace m2sdf::denoisers::detail {

/// Returns the sample loss; adds grad_scale * gradient into grads.
using PatchObjective = std::function<double(const nnmodel::Model<float>& model, const Image& patch, std::int64_t step,
                                            std::size_t slot, std::span<float> grads, double grad_scale)>;

TrainedDenoiser train_loop(const std::string& method, const std::vector<Image>& noisy_corpus,
                           const noisegen::NoiseSpec& noise, const TrainerOptions& options,
                           const PatchObjective& objective);

}  // namespace m2sdf::denoisers::detail
