#pragma once

#include "run_config.hpp"

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

namespace m2sdf::cli {

/// Provenance for one run. The manifest itself holds only host-independent
/// fields; wall-clock time goes to a sibling <stem>.timing.json.
class RunManifest {
public:
    RunManifest(const RunConfig& config, std::filesystem::path out_dir);

    void add_input(const std::filesystem::path& path);
    /// `path` is recorded relative to the output directory.
    void add_output(const std::filesystem::path& path);
    void set(const std::string& key, nlohmann::ordered_json value);

    /// Hash of tool version, command and resolved config (seeds included).
    std::string determinism_token() const;

    /// Writes <out_dir>/<stem>.manifest.json and <stem>.timing.json atomically.
    std::filesystem::path write(const std::string& stem) const;

private:
    const RunConfig& config_;
    std::filesystem::path out_dir_;
    std::vector<std::pair<std::string, std::string>> inputs_;
    std::vector<std::pair<std::string, std::string>> outputs_;
    nlohmann::ordered_json extra_ = nlohmann::ordered_json::object();
    std::chrono::steady_clock::time_point started_ = std::chrono::steady_clock::now();
};

const char* tool_version();

}  // namespace m2sdf::cli
