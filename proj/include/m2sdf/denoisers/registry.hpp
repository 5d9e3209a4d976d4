#pragma once

#include "m2sdf/imagecore/image.hpp"

#include <json.hpp>

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace m2sdf::denoisers {

using imagecore::Image;

enum class HandleKind { Classical, Trained, Wrapper };

std::string kind_name(HandleKind kind);

/// A named single-frame denoiser.
struct DenoiserHandle {
    std::string name;
    HandleKind kind = HandleKind::Classical;
    std::function<Image(const Image&)> fn;
    nlohmann::ordered_json provenance = nlohmann::ordered_json::object();

    /// Runs `fn`; DataError if it changes the image size. Values are always
    /// within [0,1] because Image clamps on construction.
    Image apply(const Image& image) const;
};

class Registry {
public:
    /// RegistrationError on an empty or duplicate name.
    void register_handle(DenoiserHandle handle);
    /// NotFoundError listing the known names.
    const DenoiserHandle& get(const std::string& name) const;
    bool contains(const std::string& name) const { return handles_.count(name) != 0; }
    /// Lexicographically sorted.
    std::vector<std::string> list_names() const;

private:
    std::map<std::string, DenoiserHandle> handles_;
};

}  // namespace m2sdf::denoisers
