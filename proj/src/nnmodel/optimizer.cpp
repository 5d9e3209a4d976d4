#include "m2sdf/nnmodel/optimizer.hpp"

#include "m2sdf/error.hpp"
#include "m2sdf/util/parallel.hpp"

#include <cmath>
#include <string>

namespace m2sdf::nnmodel {

Optimizer::Optimizer(const OptimizerConfig& config) : config_(config) { config_.validate(); }

void Optimizer::step(Model<float>& model, std::span<const float> grads) {
    auto p = model.parameters();
    if (grads.size() != p.size()) throw ArgumentError("gradient size does not match the model");
    const double lr = config_.learning_rate;
    ++t_;
    if (config_.kind == OptimizerKind::Sgd) {
        for (std::size_t i = 0; i < p.size(); ++i) p[i] -= static_cast<float>(lr * grads[i]);
        return;
    }
    if (m_.size() != p.size()) {
        m_.assign(p.size(), 0.0f);
        v_.assign(p.size(), 0.0f);
    }
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double g = grads[i];
        const double m = kBeta1 * m_[i] + (1.0 - kBeta1) * g;
        const double v = kBeta2 * v_[i] + (1.0 - kBeta2) * g * g;
        m_[i] = static_cast<float>(m);
        v_[i] = static_cast<float>(v);
        p[i] -= static_cast<float>(lr * (m / c1) / (std::sqrt(v / c2) + kEpsilon));
    }
}

void Optimizer::restore(std::int64_t steps_taken, std::vector<float> m, std::vector<float> v) {
    if (steps_taken < 0 || m.size() != v.size()) throw ArgumentError("inconsistent optimizer state");
    t_ = steps_taken;
    m_ = std::move(m);
    v_ = std::move(v);
}

double accumulate_batch(const Model<float>& model, std::size_t batch, const SampleObjective& objective,
                        std::span<float> grads) {
    if (grads.size() != model.parameter_count()) throw ArgumentError("gradient buffer has the wrong size");
    // reduced in sample order so threading never changes the sum
    std::vector<util::AlignedVector<float>> sample_grads(batch);
    std::vector<double> sample_loss(batch);
    util::parallel_for(batch, [&](std::size_t b) {
        sample_grads[b].assign(model.parameter_count(), 0.0f);
        sample_loss[b] = objective(b, sample_grads[b]);
    });
    std::fill(grads.begin(), grads.end(), 0.0f);
    double loss = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
        loss += sample_loss[b];
        for (std::size_t i = 0; i < grads.size(); ++i) grads[i] += sample_grads[b][i];
    }
    return loss;
}

void apply_update(Model<float>& model, Optimizer& optimizer, double loss, std::span<const float> grads) {
    if (!std::isfinite(loss)) throw TrainingError("non-finite loss", optimizer.steps_taken());
    optimizer.step(model, grads);
}

double loss_and_gradient(const Model<float>& model, std::span<const Stack> inputs, std::span<const Stack> targets,
                         std::span<float> grads) {
    if (inputs.empty()) throw ArgumentError("empty batch");
    if (inputs.size() != targets.size()) throw ArgumentError("inputs and targets differ in batch size");
    double total_terms = 0.0;
    for (std::size_t b = 0; b < inputs.size(); ++b) {
        const Stack& t = targets[b];
        if (t.channels < 1 || t.height != inputs[b].height || t.width != inputs[b].width) {
            throw ArgumentError("target shape does not match input");
        }
        total_terms += static_cast<double>(t.channels) * t.plane();
    }
    const double loss = accumulate_batch(model, inputs.size(), [&](std::size_t b, std::span<float> g) {
        Trace<float> trace;
        const Stack out = model.forward_traced(inputs[b], trace);
        const Stack& t = targets[b];
        Stack d_out(1, out.height, out.width);
        double sum = 0.0;
        const float* o = out.channel(0);
        for (int c = 0; c < t.channels; ++c) {
            const float* tc = t.channel(c);
            for (std::size_t i = 0; i < out.plane(); ++i) {
                const double diff = static_cast<double>(o[i]) - tc[i];
                sum += diff * diff;
                d_out.data[i] += static_cast<float>(2.0 * diff / total_terms);
            }
        }
        model.backward(trace, d_out, g);
        return sum;
    }, grads);
    return loss / total_terms;
}

double train_step(Model<float>& model, std::span<const Stack> inputs, std::span<const Stack> targets,
                  Optimizer& optimizer) {
    std::vector<float> grads(model.parameter_count());
    const double loss = loss_and_gradient(model, inputs, targets, grads);
    apply_update(model, optimizer, loss, grads);
    return loss;
}

}  // namespace m2sdf::nnmodel
