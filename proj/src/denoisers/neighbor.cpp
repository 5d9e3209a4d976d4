#include "m2sdf/denoisers/neighbor.hpp"

#include "m2sdf/error.hpp"
#include "m2sdf/noisegen/counter_rng.hpp"
#include "train_loop.hpp"

namespace m2sdf::denoisers {

CellChoice n2n_cells(int height, int width, std::uint64_t seed, std::uint64_t index) {
    if (height < 2 || width < 2) throw ArgumentError("neighbour sub-sampling needs at least 2x2 pixels");
    CellChoice c;
    c.rows = height / 2;
    c.cols = width / 2;
    const std::size_t n = static_cast<std::size_t>(c.rows) * c.cols;
    c.first.resize(n);
    c.second.resize(n);
    const noisegen::CounterRng rng(seed, noisegen::Domain::Subsample, index);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<unsigned>(rng.below(12, i));
        const unsigned first = r / 3;
        unsigned second = r % 3;  // rank among the three remaining positions
        if (second >= first) ++second;
        c.first[i] = static_cast<std::uint8_t>(first);
        c.second[i] = static_cast<std::uint8_t>(second);
    }
    return c;
}

void gather_cells(const float* src, int width, const CellChoice& cells, bool second, float* dst) {
    const auto& pick = second ? cells.second : cells.first;
    for (int r = 0; r < cells.rows; ++r) {
        for (int c = 0; c < cells.cols; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * cells.cols + c;
            const int y = 2 * r + pick[i] / 2;
            const int x = 2 * c + pick[i] % 2;
            dst[i] = src[static_cast<std::size_t>(y) * width + x];
        }
    }
}

SubsamplePair n2n_subsample(const Image& image, std::uint64_t seed, std::uint64_t index) {
    CellChoice cells = n2n_cells(image.height(), image.width(), seed, index);
    std::vector<float> a(cells.first.size()), b(cells.first.size());
    gather_cells(image.pixels().data(), image.width(), cells, false, a.data());
    gather_cells(image.pixels().data(), image.width(), cells, true, b.data());
    Image s1(cells.rows, cells.cols, std::move(a));
    Image s2(cells.rows, cells.cols, std::move(b));
    return {std::move(s1), std::move(s2), std::move(cells)};
}

N2NTerms n2n_objective(const nnmodel::Model<float>& model, const Image& noisy, const CellChoice& cells, double gamma,
                       std::span<float> grads, double grad_scale) {
    if (cells.rows != noisy.height() / 2 || cells.cols != noisy.width() / 2) {
        throw ArgumentError("cell choice does not match the image");
    }
    const nnmodel::Stack full = nnmodel::from_image(noisy);
    const nnmodel::Stack fx = model.forward(full);

    nnmodel::Stack sub1(1, cells.rows, cells.cols), sub2(1, cells.rows, cells.cols);
    nnmodel::Stack g1(1, cells.rows, cells.cols), g2(1, cells.rows, cells.cols);
    gather_cells(full.data.data(), noisy.width(), cells, false, sub1.data.data());
    gather_cells(full.data.data(), noisy.width(), cells, true, sub2.data.data());
    gather_cells(fx.data.data(), noisy.width(), cells, false, g1.data.data());
    gather_cells(fx.data.data(), noisy.width(), cells, true, g2.data.data());

    nnmodel::Trace<float> trace;
    const nnmodel::Stack out = model.forward_traced(sub1, trace);
    const double n = static_cast<double>(out.plane());
    nnmodel::Stack d_out(1, cells.rows, cells.cols);
    N2NTerms t;
    for (std::size_t i = 0; i < out.plane(); ++i) {
        const double diff = static_cast<double>(out.data[i]) - sub2.data[i];
        const double reg = diff - (static_cast<double>(g1.data[i]) - g2.data[i]);
        t.reconstruction += diff * diff;
        t.regularizer += reg * reg;
        d_out.data[i] = static_cast<float>(grad_scale * 2.0 * (diff + gamma * reg) / n);
    }
    t.reconstruction /= n;
    t.regularizer /= n;
    t.total = t.reconstruction + gamma * t.regularizer;
    if (!grads.empty()) model.backward(trace, d_out, grads);
    return t;
}

TrainedDenoiser train_n2n(const std::vector<Image>& noisy_corpus, const noisegen::NoiseSpec& noise, double gamma,
                          const TrainerOptions& options) {
    if (!(gamma >= 0.0)) throw ArgumentError("gamma must be >= 0");
    const auto batch = static_cast<std::uint64_t>(options.opt.batch_size);
    return detail::train_loop("n2n", noisy_corpus, noise, options,
                              [&](const nnmodel::Model<float>& model, const Image& patch, std::int64_t step,
                                  std::size_t slot, std::span<float> grads, double scale) {
                                  const auto cells = n2n_cells(patch.height(), patch.width(), options.seed,
                                                               static_cast<std::uint64_t>(step) * batch + slot);
                                  return n2n_objective(model, patch, cells, gamma, grads, scale).total;
                              });
}

}  // namespace m2sdf::denoisers
