#pragma once

#include <filesystem>
#include <span>
#include <string>

namespace m2sdf::util {

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::span<const unsigned char> bytes);
std::string sha256_hex(const std::string& text);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace m2sdf::util
