#pragma once

#include <json.hpp>

#include <string>

namespace m2sdf::nnmodel {

struct ModelConfig {
    int in_channels = 1;
    int hidden_channels = 16;
    int depth = 4;  // conv layers, including input and output layers
    int kernel = 3;
    bool residual = true;

    void validate() const;
    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

enum class OptimizerKind { Sgd, Adam };

struct OptimizerConfig {
    double learning_rate = 1e-3;
    OptimizerKind kind = OptimizerKind::Adam;
    int batch_size = 8;
    int steps = 1000;

    void validate() const;
    friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

std::string optimizer_kind_name(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(const std::string& name);

nlohmann::ordered_json to_json(const ModelConfig& c);
nlohmann::ordered_json to_json(const OptimizerConfig& c);
/// Missing keys keep their defaults; unknown keys and bad values raise ArgumentError.
ModelConfig model_config_from_json(const nlohmann::ordered_json& j, ModelConfig base = {});
OptimizerConfig optimizer_config_from_json(const nlohmann::ordered_json& j, OptimizerConfig base = {});

}  // namespace m2sdf::nnmodel
