#pragma once

#include "m2sdf/nnmodel/model.hpp"

#include <cstdint>
#include <vector>

namespace m2sdf::nnmodel {

struct GradientCheckOptions {
    double fd_step = 1e-5;
    int height = 8;
    int width = 8;
    std::uint64_t seed = 0;
};

/// Mean squared error of the model output against a 1-channel target.
double mse_loss(const Model<double>& model, const Volume<double>& input, const Volume<double>& target);

std::vector<double> analytic_gradient(const Model<double>& model, const Volume<double>& input,
                                      const Volume<double>& target);
std::vector<double> numeric_gradient(const Model<double>& model, const Volume<double>& input,
                                     const Volume<double>& target, double fd_step);

/// max_i |a_i - n_i| / max(|a_i|, |n_i|, 1e-6).
double max_relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric);

/// Builds a double-precision model (head re-randomised so every layer carries
/// gradient), draws a random input and target, and returns the largest
/// relative error between analytic and central-difference gradients.
double gradient_check(const ModelConfig& config, const GradientCheckOptions& options = {});

}  // namespace m2sdf::nnmodel
