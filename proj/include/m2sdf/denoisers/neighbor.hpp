#pragma once

#include "m2sdf/denoisers/trained.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace m2sdf::denoisers {

/// Cell positions are numbered 2*dy + dx inside each 2x2 cell.
struct CellChoice {
    int rows = 0;  // floor(H/2)
    int cols = 0;  // floor(W/2)
    std::vector<std::uint8_t> first;
    std::vector<std::uint8_t> second;
};

struct SubsamplePair {
    Image sub1;
    Image sub2;
    CellChoice cells;
};

/// Two distinct positions per cell, uniform over the 12 ordered pairs,
/// keyed by (seed, index). ArgumentError when H or W < 2.
CellChoice n2n_cells(int height, int width, std::uint64_t seed, std::uint64_t index = 0);
SubsamplePair n2n_subsample(const Image& image, std::uint64_t seed, std::uint64_t index = 0);

/// Picks `which` (first or second) position of every cell from a row-major
/// H x W buffer into a rows x cols buffer.
void gather_cells(const float* src, int width, const CellChoice& cells, bool second, float* dst);

struct N2NTerms {
    double reconstruction = 0.0;  // mean (f(sub1) - sub2)^2
    double regularizer = 0.0;     // mean (f(sub1) - sub2 - (g1(f(x)) - g2(f(x))))^2
    double total = 0.0;           // reconstruction + gamma * regularizer
};

/// Loss for one noisy patch. With non-empty `grads`, adds grad_scale * dTotal/dParams;
/// f(x) on the full patch is treated as a constant.
N2NTerms n2n_objective(const nnmodel::Model<float>& model, const Image& noisy, const CellChoice& cells, double gamma,
                       std::span<float> grads = {}, double grad_scale = 1.0);

inline constexpr double kDefaultN2NGamma = 2.0;

/// Neighbour sub-sampling training on noisy images. `noise` only names the
/// result. TrainingError on a non-finite loss.
TrainedDenoiser train_n2n(const std::vector<Image>& noisy_corpus, const noisegen::NoiseSpec& noise, double gamma,
                          const TrainerOptions& options);

}  // namespace m2sdf::denoisers
