#include "m2sdf/nnmodel/gradient_check.hpp"

#include "m2sdf/error.hpp"
#include "m2sdf/noisegen/counter_rng.hpp"

#include <algorithm>
#include <cmath>

namespace m2sdf::nnmodel {

namespace {

void check_target(const Volume<double>& input, const Volume<double>& target) {
    if (target.channels != 1 || target.height != input.height || target.width != input.width) {
        throw ArgumentError("target must be 1 channel with the input's spatial size");
    }
}

}  // namespace

double mse_loss(const Model<double>& model, const Volume<double>& input, const Volume<double>& target) {
    check_target(input, target);
    const auto out = model.forward(input);
    double s = 0.0;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        const double d = out.data[i] - target.data[i];
        s += d * d;
    }
    return s / static_cast<double>(out.data.size());
}

std::vector<double> analytic_gradient(const Model<double>& model, const Volume<double>& input,
                                      const Volume<double>& target) {
    check_target(input, target);
    Trace<double> trace;
    const auto out = model.forward_traced(input, trace);
    Volume<double> d_out(1, out.height, out.width);
    const double n = static_cast<double>(out.data.size());
    for (std::size_t i = 0; i < out.data.size(); ++i) d_out.data[i] = 2.0 * (out.data[i] - target.data[i]) / n;
    std::vector<double> grads(model.parameter_count(), 0.0);
    model.backward(trace, d_out, grads);
    return grads;
}

std::vector<double> numeric_gradient(const Model<double>& model, const Volume<double>& input,
                                     const Volume<double>& target, double fd_step) {
    Model<double> probe = model;
    auto p = probe.parameters();
    std::vector<double> grads(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double saved = p[i];
        p[i] = saved + fd_step;
        const double up = mse_loss(probe, input, target);
        p[i] = saved - fd_step;
        const double down = mse_loss(probe, input, target);
        p[i] = saved;
        grads[i] = (up - down) / (2.0 * fd_step);
    }
    return grads;
}

double max_relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric) {
    if (analytic.size() != numeric.size()) throw ArgumentError("gradient vectors differ in length");
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-6});
        worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
    }
    return worst;
}

double gradient_check(const ModelConfig& config, const GradientCheckOptions& options) {
    Model<double> model(config, options.seed);
    // a zero head would leave every earlier layer without gradient
    const int head = model.layer_count() - 1;
    const noisegen::CounterRng init(options.seed, noisegen::Domain::WeightInit, 1000);
    auto w = model.weight(head);
    const double bound = std::sqrt(6.0 / w.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = (2.0 * init.uniform(i) - 1.0) * bound;
    auto b = model.bias(head);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = 0.1 * (2.0 * init.uniform(w.size() + i) - 1.0);

    const noisegen::CounterRng data(options.seed, noisegen::Domain::Sampling);
    Volume<double> input(config.in_channels, options.height, options.width);
    Volume<double> target(1, options.height, options.width);
    for (std::size_t i = 0; i < input.data.size(); ++i) input.data[i] = data.uniform(0, i);
    for (std::size_t i = 0; i < target.data.size(); ++i) target.data[i] = data.uniform(1, i);

    return max_relative_error(analytic_gradient(model, input, target),
                              numeric_gradient(model, input, target, options.fd_step));
}

}  // namespace m2sdf::nnmodel
