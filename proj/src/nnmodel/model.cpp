#include "m2sdf/nnmodel/model.hpp"

#include "m2sdf/error.hpp"
#include "m2sdf/noisegen/counter_rng.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <string>

namespace m2sdf::nnmodel {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;

// cols[(c*k*k + ky*k + kx), y*W + x] = in[c, y+ky-p, x+kx-p], zero outside.
template <typename T>
void im2col(const Volume<T>& in, int k, util::AlignedVector<T>& cols) {
    const int h = in.height, w = in.width, p = k / 2;
    const std::size_t hw = in.plane();
    cols.assign(static_cast<std::size_t>(in.channels) * k * k * hw, T(0));
    for (int c = 0; c < in.channels; ++c) {
        const T* src = in.channel(c);
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                T* dst = cols.data() + (static_cast<std::size_t>(c) * k * k + ky * k + kx) * hw;
                const int dx = kx - p;
                const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
                for (int y = 0; y < h; ++y) {
                    const int sy = y + ky - p;
                    if (sy < 0 || sy >= h || x0 >= x1) continue;
                    std::copy(src + sy * w + x0 + dx, src + sy * w + x1 + dx, dst + y * w + x0);
                }
            }
        }
    }
}

template <typename T>
void col2im(const util::AlignedVector<T>& cols, int k, Volume<T>& out) {
    const int h = out.height, w = out.width, p = k / 2;
    const std::size_t hw = out.plane();
    std::fill(out.data.begin(), out.data.end(), T(0));
    for (int c = 0; c < out.channels; ++c) {
        T* dst = out.channel(c);
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                const T* src = cols.data() + (static_cast<std::size_t>(c) * k * k + ky * k + kx) * hw;
                const int dx = kx - p;
                const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
                for (int y = 0; y < h; ++y) {
                    const int sy = y + ky - p;
                    if (sy < 0 || sy >= h) continue;
                    for (int x = x0; x < x1; ++x) dst[sy * w + x + dx] += src[y * w + x];
                }
            }
        }
    }
}

}  // namespace

template <typename T>
Model<T>::Model(const ModelConfig& config, std::uint64_t seed) : config_(config), seed_(seed) {
    config_.validate();
    const int k2 = config_.kernel * config_.kernel;
    std::size_t total = 0;
    for (int l = 0; l < config_.depth; ++l) {
        offsets_.push_back(total);
        total += static_cast<std::size_t>(layer_out(l)) * layer_in(l) * k2 + layer_out(l);
    }
    params_.assign(total, T(0));

    for (int l = 0; l < config_.depth; ++l) {
        const bool zero_head = config_.residual && l == config_.depth - 1;
        if (zero_head) continue;
        const noisegen::CounterRng rng(seed, noisegen::Domain::WeightInit, static_cast<std::uint64_t>(l));
        const double bound = std::sqrt(6.0 / (layer_in(l) * k2));
        auto w = weight(l);
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<T>((2.0 * rng.uniform(i) - 1.0) * bound);
    }
}

template <typename T>
int Model<T>::layer_in(int l) const noexcept {
    return l == 0 ? config_.in_channels : config_.hidden_channels;
}

template <typename T>
int Model<T>::layer_out(int l) const noexcept {
    return l == config_.depth - 1 ? 1 : config_.hidden_channels;
}

template <typename T>
std::span<T> Model<T>::weight(int l) noexcept {
    return {params_.data() + offsets_[l], static_cast<std::size_t>(layer_out(l)) * layer_in(l) * config_.kernel * config_.kernel};
}
template <typename T>
std::span<const T> Model<T>::weight(int l) const noexcept {
    return const_cast<Model*>(this)->weight(l);
}
template <typename T>
std::span<T> Model<T>::bias(int l) noexcept {
    return {params_.data() + offsets_[l] + weight(l).size(), static_cast<std::size_t>(layer_out(l))};
}
template <typename T>
std::span<const T> Model<T>::bias(int l) const noexcept {
    return const_cast<Model*>(this)->bias(l);
}

template <typename T>
void Model<T>::check_input(const Volume<T>& input) const {
    if (input.channels != config_.in_channels) {
        throw ArgumentError("channel mismatch: model expects " + std::to_string(config_.in_channels) +
                            " input channels, got " + std::to_string(input.channels));
    }
    if (input.height < config_.kernel || input.width < config_.kernel) {
        throw ArgumentError("input smaller than the kernel");
    }
}

template <typename T>
Volume<T> Model<T>::run(const Volume<T>& input, Trace<T>* trace) const {
    check_input(input);
    const int k = config_.kernel;
    const int hw = static_cast<int>(input.plane());
    util::AlignedVector<T> cols;
    Volume<T> cur = input;
    for (int l = 0; l < config_.depth; ++l) {
        im2col(cur, k, cols);
        Volume<T> next(layer_out(l), input.height, input.width);
        const int ckk = layer_in(l) * k * k;
        ConstMapMat<T> wm(weight(l).data(), layer_out(l), ckk);
        ConstMapMat<T> cm(cols.data(), ckk, hw);
        MapMat<T> om(next.data.data(), layer_out(l), hw);
        om.noalias() = wm * cm;
        const auto b = bias(l);
        for (int o = 0; o < layer_out(l); ++o) om.row(o).array() += b[o];
        if (l + 1 < config_.depth) {
            for (auto& v : next.data) v = v > T(0) ? v : T(0);
        }
        if (trace) trace->layer_inputs.push_back(std::move(cur));
        cur = std::move(next);
    }
    if (config_.residual) {
        const T inv = T(1) / static_cast<T>(input.channels);
        T* out = cur.channel(0);
        for (int i = 0; i < hw; ++i) {
            T s = T(0);
            for (int c = 0; c < input.channels; ++c) s += input.channel(c)[i];
            out[i] += s * inv;
        }
    }
    return cur;
}

template <typename T>
Volume<T> Model<T>::forward(const Volume<T>& input) const {
    return run(input, nullptr);
}

template <typename T>
Volume<T> Model<T>::forward_traced(const Volume<T>& input, Trace<T>& trace) const {
    trace.input = input;
    trace.layer_inputs.clear();
    return run(input, &trace);
}

template <typename T>
void Model<T>::backward(const Trace<T>& trace, const Volume<T>& d_output, std::span<T> grads) const {
    if (grads.size() != params_.size()) throw ArgumentError("gradient buffer has the wrong size");
    if (static_cast<int>(trace.layer_inputs.size()) != config_.depth) throw ArgumentError("trace does not match model");
    if (d_output.channels != 1 || d_output.height != trace.input.height || d_output.width != trace.input.width) {
        throw ArgumentError("output gradient has the wrong shape");
    }
    const int k = config_.kernel;
    const int hw = static_cast<int>(d_output.plane());
    util::AlignedVector<T> cols;
    util::AlignedVector<T> dcols;
    util::AlignedVector<T> gw_scratch;
    Volume<T> delta = d_output;  // gradient w.r.t. pre-activation of layer l
    for (int l = config_.depth - 1; l >= 0; --l) {
        const Volume<T>& in = trace.layer_inputs[l];
        const int ckk = layer_in(l) * k * k;
        im2col(in, k, cols);
        ConstMapMat<T> dm(delta.data.data(), layer_out(l), hw);
        ConstMapMat<T> cm(cols.data(), ckk, hw);
        // product into an aligned scratch; the caller's buffer may have any alignment
        gw_scratch.resize(static_cast<std::size_t>(layer_out(l)) * ckk);
        MapMat<T> gw(gw_scratch.data(), layer_out(l), ckk);
        gw.noalias() = dm * cm.transpose();
        T* gdst = grads.data() + offsets_[l];
        for (std::size_t i = 0; i < gw_scratch.size(); ++i) gdst[i] += gw_scratch[i];
        T* gb = grads.data() + offsets_[l] + weight(l).size();
        for (int o = 0; o < layer_out(l); ++o) gb[o] += dm.row(o).sum();
        if (l == 0) break;

        dcols.resize(static_cast<std::size_t>(ckk) * hw);
        ConstMapMat<T> wm(weight(l).data(), layer_out(l), ckk);
        MapMat<T> dc(dcols.data(), ckk, hw);
        dc.noalias() = wm.transpose() * dm;
        Volume<T> d_in(layer_in(l), in.height, in.width);
        col2im(dcols, k, d_in);
        // `in` is the ReLU output of layer l-1.
        for (std::size_t i = 0; i < d_in.data.size(); ++i) {
            if (!(in.data[i] > T(0))) d_in.data[i] = T(0);
        }
        delta = std::move(d_in);
    }
}

template class Model<float>;
template class Model<double>;

Model<float> build_model(const ModelConfig& config, std::uint64_t seed) { return Model<float>(config, seed); }

imagecore::Image predict(const Model<float>& model, const Stack& input) { return to_image(model.forward(input)); }

}  // namespace m2sdf::nnmodel
