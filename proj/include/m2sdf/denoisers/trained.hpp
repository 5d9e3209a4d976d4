#pragma once

#include "m2sdf/denoisers/registry.hpp"
#include "m2sdf/imagecore/patches.hpp"
#include "m2sdf/nnmodel/model.hpp"
#include "m2sdf/nnmodel/optimizer.hpp"
#include "m2sdf/noisegen/noise.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace m2sdf::denoisers {

struct TrainerOptions {
    nnmodel::ModelConfig model{1, 16, 4, 3, true};
    nnmodel::OptimizerConfig opt{};
    imagecore::PatchSpec patches{64, 64};
    std::uint64_t seed = 0;
    std::function<void(std::int64_t step, double loss)> on_step;
};

/// A self-supervised single-frame denoiser and the state needed to persist it.
struct TrainedDenoiser {
    std::string method;  // "n2n" or "b2u"
    noisegen::NoiseSpec noise;
    std::uint64_t seed = 0;
    std::shared_ptr<const nnmodel::Model<float>> model;
    nnmodel::Optimizer optimizer;
    std::vector<double> losses;

    /// method + "-" + noise label, e.g. "n2n-g25".
    std::string name() const;
    DenoiserHandle handle() const;
};

/// Handle around a 1-channel model; apply = clamped forward pass.
DenoiserHandle model_handle(std::string name, std::shared_ptr<const nnmodel::Model<float>> model,
                            nlohmann::ordered_json provenance);

/// Writes <dir>/<name>.m2sd and the sidecar <dir>/<name>.json
/// {name, kind, method, noise_spec, seed, checkpoint}.
void save_trained(const TrainedDenoiser& trained, const std::filesystem::path& dir);

/// NotFoundError when no sidecar exists for `name`.
DenoiserHandle load_trained_handle(const std::filesystem::path& dir, const std::string& name);

/// Built-in names, "log:<name>" wrappers of any resolvable name, and trained
/// handles found in `models_dir`.
DenoiserHandle resolve_handle(const std::string& name, const std::filesystem::path& models_dir = {});

nlohmann::ordered_json noise_spec_to_json(const noisegen::NoiseSpec& spec);
noisegen::NoiseSpec noise_spec_from_json(const nlohmann::ordered_json& j);

/// Training patches of every corpus image (row-major per image, images in
/// order). Images smaller than the patch size contribute one even-sized crop.
std::vector<Image> training_patches(const std::vector<Image>& corpus, const imagecore::PatchSpec& spec);

}  // namespace m2sdf::denoisers
