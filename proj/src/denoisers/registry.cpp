#include "m2sdf/denoisers/registry.hpp"

#include "m2sdf/error.hpp"

namespace m2sdf::denoisers {

std::string kind_name(HandleKind kind) {
    switch (kind) {
        case HandleKind::Classical: return "classical";
        case HandleKind::Trained: return "trained";
        case HandleKind::Wrapper: return "wrapper";
    }
    return "unknown";
}

Image DenoiserHandle::apply(const Image& image) const {
    if (!fn) throw ArgumentError("denoiser '" + name + "' has no apply function");
    Image out = fn(image);
    if (!out.same_shape(image)) throw DataError("denoiser '" + name + "' changed the image size");
    return out;
}

void Registry::register_handle(DenoiserHandle handle) {
    if (handle.name.empty()) throw RegistrationError("denoiser name must be non-empty");
    const std::string name = handle.name;
    if (!handles_.emplace(name, std::move(handle)).second) {
        throw RegistrationError("denoiser '" + name + "' is already registered");
    }
}

const DenoiserHandle& Registry::get(const std::string& name) const {
    const auto it = handles_.find(name);
    if (it == handles_.end()) {
        std::string known;
        for (const auto& [n, _] : handles_) known += (known.empty() ? "" : ", ") + n;
        throw NotFoundError("unknown denoiser '" + name + "' (known: " + known + ")");
    }
    return it->second;
}

std::vector<std::string> Registry::list_names() const {
    std::vector<std::string> names;
    for (const auto& [n, _] : handles_) names.push_back(n);
    return names;
}

}  // namespace m2sdf::denoisers
