#pragma once

#include "m2sdf/nnmodel/model.hpp"
#include "m2sdf/nnmodel/optimizer.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace m2sdf::nnmodel {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct LoadedCheckpoint {
    Model<float> model;
    Optimizer optimizer;
    std::string rng_state;  // hex; (seed, step) of the counter-based streams
    nlohmann::ordered_json extra;
};

/// Layout: docs/checkpoint_format.md. Written atomically.
void save_checkpoint(const std::filesystem::path& path, const Model<float>& model, const Optimizer& optimizer,
                     const nlohmann::ordered_json& extra = nlohmann::ordered_json::object());

/// CheckpointFormatError for foreign, corrupt or truncated files;
/// CheckpointVersionError when the version is newer than supported.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace m2sdf::nnmodel
