#include "m2sdf/denoisers/log_wrap.hpp"

#include <cmath>

namespace m2sdf::denoisers {

DenoiserHandle log_domain_wrap(DenoiserHandle inner) {
    const double lo = std::log(kLogEpsilon);
    const double span = std::log(1.0 + kLogEpsilon) - lo;
    DenoiserHandle out;
    out.name = "log:" + inner.name;
    out.kind = HandleKind::Wrapper;
    out.provenance = {{"wrapper", "log"}, {"epsilon", kLogEpsilon}, {"inner", inner.provenance}};
    out.fn = [inner = std::move(inner), lo, span](const Image& x) {
        const auto px = x.pixels();
        std::vector<float> u(px.size());
        for (std::size_t i = 0; i < px.size(); ++i) u[i] = static_cast<float>((std::log(px[i] + kLogEpsilon) - lo) / span);
        const Image y = inner.apply(Image(x.height(), x.width(), std::move(u)));
        const auto py = y.pixels();
        std::vector<float> back(py.size());
        for (std::size_t i = 0; i < py.size(); ++i) back[i] = static_cast<float>(std::exp(py[i] * span + lo) - kLogEpsilon);
        return Image(x.height(), x.width(), std::move(back));
    };
    return out;
}

}  // namespace m2sdf::denoisers
