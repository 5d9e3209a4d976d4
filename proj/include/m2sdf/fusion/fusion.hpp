#pragma once

#include "m2sdf/denoisers/registry.hpp"
#include "m2sdf/imagecore/patches.hpp"
#include "m2sdf/nnmodel/model.hpp"
#include "m2sdf/nnmodel/optimizer.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace m2sdf::fusion {

using imagecore::Image;

inline constexpr const char* kNoisyFrameName = "noisy";

/// The M variants of one source image, in frame order.
struct FusionSequence {
    std::size_t source_id = 0;
    std::vector<std::string> names;
    std::vector<Image> frames;
    bool include_noisy = false;

    int size() const noexcept { return static_cast<int>(frames.size()); }
    /// ArgumentError unless frames are nonempty, equally sized and uniquely named.
    void validate() const;
};

/// Frames are the denoiser outputs in name order, preceded by the raw frame
/// (named "noisy") when include_noisy. A failing denoiser is reported as a
/// DataError naming its frame.
FusionSequence build_sequence(const Image& noisy, std::vector<denoisers::DenoiserHandle> handles,
                              bool include_noisy, std::size_t source_id = 0);

/// J (inputs) and K (targets), each in ascending frame order.
struct Partition {
    std::vector<int> inputs;
    std::vector<int> targets;
};

/// Uniform permutation of [0, M) keyed by (seed, step, sequence_id): the first
/// M - k_target positions become J, the rest K.
Partition shuffle_partition(int M, int k_target, std::uint64_t seed, std::int64_t step, std::uint64_t sequence_id);

/// True when J and K are disjoint, cover [0, M) and have the configured sizes.
bool partition_valid(const Partition& p, int M, int k_target);

/// Mean over targets of the per-pixel mean squared error.
double mutual_loss(const Image& prediction, const std::vector<Image>& targets);

struct FusionConfig {
    int M = 2;
    int k_target = 1;
    nnmodel::ModelConfig model{1, 16, 4, 3, true};
    nnmodel::OptimizerConfig opt{};
    imagecore::PatchSpec patches{64, 64};
    std::uint64_t shuffle_seed = 0;

    /// Default model and optimizer for M frames with in_channels = M - k_target.
    static FusionConfig for_frames(int M, int k_target = 1);
    void validate() const;
};

nlohmann::ordered_json to_json(const FusionConfig& config);
/// Unknown keys raise ArgumentError. model.in_channels follows M - k_target
/// unless given explicitly.
FusionConfig fusion_config_from_json(const nlohmann::ordered_json& j, FusionConfig base = {});

struct FusionModel {
    nnmodel::Model<float> model;
    nnmodel::Optimizer optimizer;
    std::vector<std::string> frame_names;
    int k_target = 1;
    std::vector<double> losses;
};

struct TrainHooks {
    std::function<void(std::int64_t step, double loss)> on_step;
    /// Observes every partition drawn, before it is used.
    std::function<void(std::int64_t step, std::size_t item, const Partition&)> on_partition;
};

/// Mutual-supervision training on aligned patches of every sequence. All
/// sequences must have config.M frames with identical names.
FusionModel train_m2sdf(const std::vector<FusionSequence>& corpus, const FusionConfig& config,
                        const TrainHooks& hooks = {});

/// Averages the model over k_target + 1 cyclic rotations of the frame order
/// ({(r + i) mod M : i < M - k_target} for r = 0..k_target, each stacked
/// ascending); k_target = 0 is a single pass over all frames.
Image fuse(const nnmodel::Model<float>& model, const FusionSequence& sequence, int k_target);

/// Pixelwise mean of all frames.
Image frame_average(const FusionSequence& sequence);

/// Checkpoint with extra {kind: "m2sdf", frame_names, k_target, M}.
void save_fusion(const FusionModel& fm, const std::filesystem::path& path);
FusionModel load_fusion(const std::filesystem::path& path);

/// <dir>/frame<j>.png per frame plus <dir>/index.json
/// {source_id, frames: [{name, file}], include_noisy}. PNG frames are 8-bit.
void save_sequence(const FusionSequence& sequence, const std::filesystem::path& dir);
FusionSequence load_sequence(const std::filesystem::path& dir);

}  // namespace m2sdf::fusion
