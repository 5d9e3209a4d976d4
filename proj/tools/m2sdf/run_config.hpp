#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace m2sdf::cli {

/// Bad flags, config keys or missing inputs; exit status 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class KeyType { Int, Double, Bool, String, StringList };

struct Key {
    std::string name;
    KeyType type;
    nlohmann::ordered_json fallback;  // null = required
    std::string help;
    std::string flag;  // defaults to --name with '_' -> '-'
};

/// Settings for one command: schema defaults, then the JSON config file, then
/// flags given on the command line.
class RunConfig {
public:
    RunConfig(std::string command, std::vector<Key> keys);

    void attach(CLI::App& app);
    /// Throws UsageError on unknown keys, type mismatches or missing required keys.
    void resolve(const std::optional<std::filesystem::path>& config_file);

    const std::string& command() const noexcept { return command_; }
    const nlohmann::ordered_json& resolved() const noexcept { return resolved_; }

    std::int64_t integer(const std::string& key) const;
    double number(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::string text(const std::string& key) const;
    std::vector<std::string> list(const std::string& key) const;

private:
    const Key& key(const std::string& name) const;

    std::string command_;
    std::vector<Key> keys_;
    std::map<std::string, std::string> raw_;
    std::map<std::string, bool> bools_;
    std::map<std::string, CLI::Option*> options_;
    nlohmann::ordered_json resolved_;
};

/// Keys every command accepts: seed, out_dir (--out), precision, format.
std::vector<Key> common_keys();

}  // namespace m2sdf::cli
