#include "m2sdf/util/json_file.hpp"

#include "m2sdf/error.hpp"

#include <fstream>
#include <sstream>

namespace m2sdf::util {

nlohmann::ordered_json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    try {
        return nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& ex) {
        throw FormatError("malformed JSON in '" + path.string() + "': " + ex.what());
    }
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + tmp.string() + "'");
        out << text;
        out.flush();
        if (!out) throw IoError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename onto '" + path.string() + "': " + ec.message());
}

void write_json_atomic(const std::filesystem::path& path, const nlohmann::ordered_json& value) {
    write_text_atomic(path, value.dump(2) + "\n");
}

}  // namespace m2sdf::util
