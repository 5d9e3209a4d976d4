#include "m2sdf/denoisers/blindspot.hpp"

#include "m2sdf/error.hpp"
#include "train_loop.hpp"

namespace m2sdf::denoisers {

namespace {

std::vector<std::uint8_t> make_mask_map(int h, int w) {
    std::vector<std::uint8_t> map(static_cast<std::size_t>(h) * w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) map[static_cast<std::size_t>(y) * w + x] = static_cast<std::uint8_t>(mask_copy_of(y, x));
    }
    return map;
}

float neighbour_mean(const Image& img, int y, int x) {
    float s = 0.0f;
    int n = 0;
    if (y > 0) s += img.at(y - 1, x), ++n;
    if (y + 1 < img.height()) s += img.at(y + 1, x), ++n;
    if (x > 0) s += img.at(y, x - 1), ++n;
    if (x + 1 < img.width()) s += img.at(y, x + 1), ++n;
    return n ? s / static_cast<float>(n) : img.at(y, x);
}

}  // namespace

MaskedVolume b2u_mask_volume(const Image& image) {
    const int h = image.height(), w = image.width();
    MaskedVolume vol;
    vol.mask_map = make_mask_map(h, w);
    for (int k = 0; k < 4; ++k) {
        std::vector<float> px(image.pixels().begin(), image.pixels().end());
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (mask_copy_of(y, x) == k) px[static_cast<std::size_t>(y) * w + x] = neighbour_mean(image, y, x);
            }
        }
        vol.copies[k] = Image(h, w, std::move(px));
    }
    return vol;
}

Image b2u_remap(std::span<const Image> outputs, std::span<const std::uint8_t> mask_map) {
    if (outputs.size() != 4) throw ArgumentError("remap needs exactly 4 outputs");
    for (const auto& o : outputs) {
        if (!o.same_shape(outputs[0])) throw ArgumentError("remap outputs differ in size");
    }
    if (mask_map.size() != outputs[0].size()) throw ArgumentError("mask map does not match the outputs");
    std::vector<float> px(mask_map.size());
    for (std::size_t i = 0; i < px.size(); ++i) {
        if (mask_map[i] > 3) throw ArgumentError("mask map entry out of range");
        px[i] = outputs[mask_map[i]].pixels()[i];
    }
    return Image(outputs[0].height(), outputs[0].width(), std::move(px));
}

B2UTerms b2u_objective(const nnmodel::Model<float>& model, const Image& noisy, double lambda_vis,
                       std::span<float> grads, double grad_scale) {
    const MaskedVolume vol = b2u_mask_volume(noisy);
    const std::size_t n = noisy.size();
    const auto x = noisy.pixels();

    std::array<nnmodel::Trace<float>, 4> traces;
    std::array<nnmodel::Stack, 4> outs;
    for (int k = 0; k < 4; ++k) outs[k] = model.forward_traced(nnmodel::from_image(vol.copies[k]), traces[k]);
    std::vector<double> remap(n);
    for (std::size_t i = 0; i < n; ++i) remap[i] = outs[vol.mask_map[i]].data[i];

    nnmodel::Trace<float> vis_trace;
    const nnmodel::Stack vis = model.forward_traced(nnmodel::from_image(noisy), vis_trace);

    B2UTerms t;
    std::array<nnmodel::Stack, 4> d_outs;
    for (auto& d : d_outs) d = nnmodel::Stack(1, noisy.height(), noisy.width());
    nnmodel::Stack d_vis(1, noisy.height(), noisy.width());
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double blind = remap[i] - x[i];
        const double visible = vis.data[i] - remap[i];  // remap is a constant here
        t.blind += blind * blind;
        t.visible += visible * visible;
        d_outs[vol.mask_map[i]].data[i] = static_cast<float>(grad_scale * 2.0 * blind * inv_n);
        d_vis.data[i] = static_cast<float>(grad_scale * 2.0 * lambda_vis * visible * inv_n);
    }
    t.blind *= inv_n;
    t.visible *= inv_n;
    t.total = t.blind + lambda_vis * t.visible;
    if (!grads.empty()) {
        for (int k = 0; k < 4; ++k) model.backward(traces[k], d_outs[k], grads);
        if (lambda_vis > 0.0) model.backward(vis_trace, d_vis, grads);
    }
    return t;
}

TrainedDenoiser train_b2u(const std::vector<Image>& noisy_corpus, const noisegen::NoiseSpec& noise, double lambda_vis,
                          const TrainerOptions& options) {
    if (!(lambda_vis >= 0.0)) throw ArgumentError("lambda_vis must be >= 0");
    return detail::train_loop("b2u", noisy_corpus, noise, options,
                              [&](const nnmodel::Model<float>& model, const Image& patch, std::int64_t, std::size_t,
                                  std::span<float> grads, double scale) {
                                  return b2u_objective(model, patch, lambda_vis, grads, scale).total;
                              });
}

}  // namespace m2sdf::denoisers
