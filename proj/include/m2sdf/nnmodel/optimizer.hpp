#pragma once

#include "m2sdf/nnmodel/config.hpp"
#include "m2sdf/nnmodel/model.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace m2sdf::nnmodel {

class Optimizer {
public:
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEpsilon = 1e-8;

    explicit Optimizer(const OptimizerConfig& config = {});

    const OptimizerConfig& config() const noexcept { return config_; }
    std::int64_t steps_taken() const noexcept { return t_; }

    void step(Model<float>& model, std::span<const float> grads);

    const std::vector<float>& first_moment() const noexcept { return m_; }
    const std::vector<float>& second_moment() const noexcept { return v_; }
    void restore(std::int64_t steps_taken, std::vector<float> m, std::vector<float> v);

private:
    OptimizerConfig config_;
    std::int64_t t_ = 0;
    std::vector<float> m_;
    std::vector<float> v_;
};

/// Per-sample loss term: returns the sample's loss contribution and adds
/// its parameter gradient into `grads` (zeroed, parameter_count() long).
using SampleObjective = std::function<double(std::size_t sample, std::span<float> grads)>;

/// Runs `objective` for every sample (possibly in parallel), then sums the
/// losses and gradients in sample order into `grads`. Returns the summed loss.
double accumulate_batch(const Model<float>& model, std::size_t batch, const SampleObjective& objective,
                        std::span<float> grads);

/// Finite-loss check plus one optimiser update. TrainingError carries the
/// optimiser step index.
void apply_update(Model<float>& model, Optimizer& optimizer, double loss, std::span<const float> grads);

/// Mean over batch, target channels and pixels of (output - target_c)^2.
/// Targets may carry several channels; each is compared with the single
/// output channel. Gradients are written (not added) into `grads`.
double loss_and_gradient(const Model<float>& model, std::span<const Stack> inputs, std::span<const Stack> targets,
                         std::span<float> grads);

/// One optimiser update; returns the pre-update loss. TrainingError (with
/// the optimiser step index) on a non-finite loss.
double train_step(Model<float>& model, std::span<const Stack> inputs, std::span<const Stack> targets,
                  Optimizer& optimizer);

}  // namespace m2sdf::nnmodel
