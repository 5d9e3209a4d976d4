#include "run_config.hpp"

#include "m2sdf/error.hpp"
#include "m2sdf/util/json_file.hpp"

#include <algorithm>
#include <charconv>

namespace m2sdf::cli {

namespace {

std::string dashed(std::string s) {
    std::replace(s.begin(), s.end(), '_', '-');
    return "--" + s;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto end = s.find(',', start);
        std::string item = s.substr(start, end == std::string::npos ? std::string::npos : end - start);
        if (!item.empty()) out.push_back(item);
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return out;
}

nlohmann::ordered_json parse_flag(const Key& k, const std::string& raw) {
    const char* first = raw.data();
    const char* last = raw.data() + raw.size();
    switch (k.type) {
        case KeyType::Int: {
            std::int64_t v = 0;
            const auto r = std::from_chars(first, last, v);
            if (r.ec != std::errc() || r.ptr != last) throw UsageError(dashed(k.name) + " expects an integer, got '" + raw + "'");
            return v;
        }
        case KeyType::Double: {
            double v = 0;
            const auto r = std::from_chars(first, last, v);
            if (r.ec != std::errc() || r.ptr != last) throw UsageError(dashed(k.name) + " expects a number, got '" + raw + "'");
            return v;
        }
        case KeyType::StringList: return split_commas(raw);
        default: return raw;
    }
}

bool type_matches(KeyType t, const nlohmann::ordered_json& v) {
    switch (t) {
        case KeyType::Int: return v.is_number_integer();
        case KeyType::Double: return v.is_number();
        case KeyType::Bool: return v.is_boolean();
        case KeyType::String: return v.is_string();
        case KeyType::StringList:
            return v.is_string() || (v.is_array() && std::all_of(v.begin(), v.end(), [](const auto& e) { return e.is_string(); }));
    }
    return false;
}

const char* type_name(KeyType t) {
    switch (t) {
        case KeyType::Int: return "an integer";
        case KeyType::Double: return "a number";
        case KeyType::Bool: return "a boolean";
        case KeyType::String: return "a string";
        case KeyType::StringList: return "a list of strings";
    }
    return "?";
}

}  // namespace

std::vector<Key> common_keys() {
    return {{"seed", KeyType::Int, 0, "Seed for every random stream", ""},
            {"out_dir", KeyType::String, "m2sdf_out", "Output directory", "--out"},
            {"precision", KeyType::String, "float32", "Arithmetic precision (float32)", ""},
            {"format", KeyType::String, "csv", "Report format: csv or json", ""}};
}

RunConfig::RunConfig(std::string command, std::vector<Key> keys) : command_(std::move(command)) {
    keys_ = common_keys();
    keys_.insert(keys_.end(), keys.begin(), keys.end());
}

void RunConfig::attach(CLI::App& app) {
    for (const auto& k : keys_) {
        const std::string name = k.flag.empty() ? dashed(k.name) : k.flag;
        if (k.type == KeyType::Bool) {
            options_[k.name] = app.add_flag(name + ",!--no-" + name.substr(2), bools_[k.name], k.help);
        } else {
            options_[k.name] = app.add_option(name, raw_[k.name], k.help);
        }
    }
}

const Key& RunConfig::key(const std::string& name) const {
    for (const auto& k : keys_) {
        if (k.name == name) return k;
    }
    throw std::logic_error("undeclared key '" + name + "'");
}

void RunConfig::resolve(const std::optional<std::filesystem::path>& config_file) {
    resolved_ = nlohmann::ordered_json::object();
    for (const auto& k : keys_) resolved_[k.name] = k.fallback;

    if (config_file) {
        nlohmann::ordered_json file;
        try {
            file = util::read_json(*config_file);
        } catch (const Error& e) {
            throw UsageError(std::string("cannot use config: ") + e.what());
        }
        if (!file.is_object()) throw UsageError("config file must hold a JSON object");
        for (const auto& [name, value] : file.items()) {
            const auto it = std::find_if(keys_.begin(), keys_.end(), [&](const Key& k) { return k.name == name; });
            if (it == keys_.end()) throw UsageError("unknown config key '" + name + "' for " + command_);
            if (!type_matches(it->type, value)) throw UsageError("config key '" + name + "' must be " + type_name(it->type));
            resolved_[name] = (it->type == KeyType::StringList && value.is_string()) ? parse_flag(*it, value.get<std::string>())
                                                                                    : value;
        }
    }
    for (const auto& k : keys_) {
        const auto* opt = options_.count(k.name) ? options_.at(k.name) : nullptr;
        if (!opt || opt->count() == 0) continue;
        resolved_[k.name] = k.type == KeyType::Bool ? nlohmann::ordered_json(bools_.at(k.name)) : parse_flag(k, raw_.at(k.name));
    }
    for (const auto& k : keys_) {
        if (resolved_[k.name].is_null()) {
            const std::string name = k.flag.empty() ? dashed(k.name) : k.flag;
            throw UsageError(command_ + " requires " + name);
        }
    }
    if (text("precision") != "float32") throw UsageError("precision must be float32 (the only supported precision)");
    if (const auto f = text("format"); f != "csv" && f != "json") throw UsageError("--format must be csv or json");
}

std::int64_t RunConfig::integer(const std::string& k) const {
    key(k);
    return resolved_.at(k).get<std::int64_t>();
}
double RunConfig::number(const std::string& k) const {
    key(k);
    return resolved_.at(k).get<double>();
}
bool RunConfig::flag(const std::string& k) const {
    key(k);
    return resolved_.at(k).get<bool>();
}
std::string RunConfig::text(const std::string& k) const {
    key(k);
    return resolved_.at(k).get<std::string>();
}
std::vector<std::string> RunConfig::list(const std::string& k) const {
    key(k);
    return resolved_.at(k).get<std::vector<std::string>>();
}

}  // namespace m2sdf::cli
