#pragma once

#include "m2sdf/nnmodel/config.hpp"
#include "m2sdf/nnmodel/volume.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace m2sdf::nnmodel {

/// Layer inputs recorded by forward_traced, consumed by backward.
template <typename T>
struct Trace {
    Volume<T> input;
    std::vector<Volume<T>> layer_inputs;
};

/// Plain CNN: conv+ReLU blocks with "same" zero padding and a 1-channel
/// linear head. With residual=true the head starts at zero and its output is
/// added to the mean of the input channels.
///
/// All parameters live in one flat buffer. Layer l stores its weights as
/// [out][in][k][k] followed by its [out] biases.
template <typename T>
class Model {
public:
    Model(const ModelConfig& config, std::uint64_t seed);

    const ModelConfig& config() const noexcept { return config_; }
    std::uint64_t seed() const noexcept { return seed_; }

    int layer_count() const noexcept { return config_.depth; }
    int layer_in(int l) const noexcept;
    int layer_out(int l) const noexcept;

    std::span<T> parameters() noexcept { return params_; }
    std::span<const T> parameters() const noexcept { return params_; }
    std::size_t parameter_count() const noexcept { return params_.size(); }

    std::span<T> weight(int l) noexcept;
    std::span<const T> weight(int l) const noexcept;
    std::span<T> bias(int l) noexcept;
    std::span<const T> bias(int l) const noexcept;

    /// Output is 1 x H x W. ArgumentError on channel mismatch or an input
    /// smaller than the kernel.
    Volume<T> forward(const Volume<T>& input) const;
    Volume<T> forward_traced(const Volume<T>& input, Trace<T>& trace) const;

    /// Adds dLoss/dParams into `grads` (size parameter_count()).
    void backward(const Trace<T>& trace, const Volume<T>& d_output, std::span<T> grads) const;

    template <typename U>
    Model<U> cast() const {
        Model<U> out(config_, seed_);
        auto dst = out.parameters();
        for (std::size_t i = 0; i < params_.size(); ++i) dst[i] = static_cast<U>(params_[i]);
        return out;
    }

private:
    void check_input(const Volume<T>& input) const;
    Volume<T> run(const Volume<T>& input, Trace<T>* trace) const;

    ModelConfig config_;
    std::uint64_t seed_;
    util::AlignedVector<T> params_;
    std::vector<std::size_t> offsets_;  // start of layer l's weights
};

extern template class Model<float>;
extern template class Model<double>;

/// build_model: fan-in scaled uniform initialisation, deterministic in seed.
Model<float> build_model(const ModelConfig& config, std::uint64_t seed);

/// Forward pass clamped into an Image.
imagecore::Image predict(const Model<float>& model, const Stack& input);

}  // namespace m2sdf::nnmodel
