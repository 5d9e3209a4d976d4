#include "manifest.hpp"

#include "m2sdf/util/json_file.hpp"
#include "m2sdf/util/sha256.hpp"

namespace m2sdf::cli {

const char* tool_version() { return M2SDF_VERSION; }

RunManifest::RunManifest(const RunConfig& config, std::filesystem::path out_dir)
    : config_(config), out_dir_(std::move(out_dir)) {}

void RunManifest::add_input(const std::filesystem::path& path) {
    inputs_.emplace_back(path.generic_string(), util::sha256_file(path));
}

void RunManifest::add_output(const std::filesystem::path& path) {
    outputs_.emplace_back(path.lexically_relative(out_dir_).generic_string(), util::sha256_file(path));
}

void RunManifest::set(const std::string& key, nlohmann::ordered_json value) { extra_[key] = std::move(value); }

std::string RunManifest::determinism_token() const {
    const nlohmann::ordered_json basis{{"tool_version", tool_version()}, {"command", config_.command()},
                                       {"config", config_.resolved()}};
    return util::sha256_hex(basis.dump());
}

std::filesystem::path RunManifest::write(const std::string& stem) const {
    auto files = [](const std::vector<std::pair<std::string, std::string>>& v) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& [p, h] : v) arr.push_back({{"path", p}, {"sha256", h}});
        return arr;
    };
    nlohmann::ordered_json m;
    m["tool"] = "m2sdf";
    m["tool_version"] = tool_version();
    m["command"] = config_.command();
    m["config"] = config_.resolved();
    m["inputs"] = files(inputs_);
    m["outputs"] = files(outputs_);
    m["determinism_token"] = determinism_token();
    for (const auto& [k, v] : extra_.items()) m[k] = v;

    const auto path = out_dir_ / (stem + ".manifest.json");
    util::write_json_atomic(path, m);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    util::write_json_atomic(out_dir_ / (stem + ".timing.json"), {{"wall_clock_seconds", secs}});
    return path;
}

}  // namespace m2sdf::cli
