#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>

namespace m2sdf::util {

/// Parses a JSON file; IoError when unreadable, FormatError when malformed.
nlohmann::ordered_json read_json(const std::filesystem::path& path);

/// Writes `text` to a sibling temporary file and renames it over `path`.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

/// Pretty-printed (2-space) JSON with a trailing newline, written atomically.
void write_json_atomic(const std::filesystem::path& path, const nlohmann::ordered_json& value);

}  // namespace m2sdf::util
