#include "m2sdf/nnmodel/config.hpp"

#include "m2sdf/error.hpp"

#include <cmath>
#include <set>

namespace m2sdf::nnmodel {

void ModelConfig::validate() const {
    if (in_channels < 1) throw ArgumentError("in_channels must be >= 1");
    if (hidden_channels < 1) throw ArgumentError("hidden_channels must be >= 1");
    if (depth < 2) throw ArgumentError("depth must be >= 2");
    if (kernel < 1 || kernel % 2 == 0) throw ArgumentError("kernel must be a positive odd integer");
}

void OptimizerConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ArgumentError("learning_rate must be > 0");
    if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
    if (steps < 1) throw ArgumentError("steps must be >= 1");
}

std::string optimizer_kind_name(OptimizerKind kind) { return kind == OptimizerKind::Sgd ? "sgd" : "adam"; }

OptimizerKind parse_optimizer_kind(const std::string& name) {
    if (name == "sgd") return OptimizerKind::Sgd;
    if (name == "adam") return OptimizerKind::Adam;
    throw ArgumentError("unknown optimizer '" + name + "' (expected sgd or adam)");
}

nlohmann::ordered_json to_json(const ModelConfig& c) {
    return {{"in_channels", c.in_channels},
            {"hidden_channels", c.hidden_channels},
            {"depth", c.depth},
            {"kernel", c.kernel},
            {"residual", c.residual}};
}

nlohmann::ordered_json to_json(const OptimizerConfig& c) {
    return {{"learning_rate", c.learning_rate},
            {"kind", optimizer_kind_name(c.kind)},
            {"batch_size", c.batch_size},
            {"steps", c.steps}};
}

namespace {

void reject_unknown(const nlohmann::ordered_json& j, const std::set<std::string>& known, const char* what) {
    if (!j.is_object()) throw ArgumentError(std::string(what) + " must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key)) throw ArgumentError(std::string("unknown ") + what + " key '" + key + "'");
    }
}

template <typename V>
void take(const nlohmann::ordered_json& j, const char* key, V& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<V>();
    } catch (const nlohmann::json::exception&) {
        throw ArgumentError(std::string("bad value for '") + key + "'");
    }
}

}  // namespace

ModelConfig model_config_from_json(const nlohmann::ordered_json& j, ModelConfig c) {
    reject_unknown(j, {"in_channels", "hidden_channels", "depth", "kernel", "residual"}, "model config");
    take(j, "in_channels", c.in_channels);
    take(j, "hidden_channels", c.hidden_channels);
    take(j, "depth", c.depth);
    take(j, "kernel", c.kernel);
    take(j, "residual", c.residual);
    c.validate();
    return c;
}

OptimizerConfig optimizer_config_from_json(const nlohmann::ordered_json& j, OptimizerConfig c) {
    reject_unknown(j, {"learning_rate", "kind", "batch_size", "steps"}, "optimizer config");
    take(j, "learning_rate", c.learning_rate);
    take(j, "batch_size", c.batch_size);
    take(j, "steps", c.steps);
    if (j.contains("kind")) {
        std::string kind;
        take(j, "kind", kind);
        c.kind = parse_optimizer_kind(kind);
    }
    c.validate();
    return c;
}

}  // namespace m2sdf::nnmodel
