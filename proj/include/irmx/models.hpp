#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "irmx/matrix.hpp"
#include "irmx/rng.hpp"

namespace irmx {

/// Flat parameter-space vector. Ordering follows Model::parameters().
using GradientVector = std::vector<double>;

/// Phi(x) = w . x (+ bias when enabled).
///
/// For SEM data (D = 2d) the first d weights are w_inv and the last d are
/// w_spu. Flattening: w[0..D), then bias if `use_bias`.
struct LinearModel {
    std::vector<double> w;
    double bias = 0.0;
    bool use_bias = false;

    static LinearModel zeros(std::size_t dim, bool use_bias = false);

    std::size_t input_dim() const { return w.size(); }
    std::size_t parameter_count() const { return w.size() + (use_bias ? 1 : 0); }

    friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

/// Fully connected ReLU network with a single output logit.
///
/// Layer l maps width in_l -> out_l with weight (out_l x in_l) and bias out_l.
/// ReLU follows every layer except the last. Flattening is layer by layer,
/// weights row-major then bias.
struct MlpModel {
    struct Layer {
        Matrix weight;
        std::vector<double> bias;
        friend bool operator==(const Layer&, const Layer&) = default;
    };
    std::vector<Layer> layers;

    /// widths = {d0, d1, ..., 1}. Weights ~ N(0, 1/fan_in), biases 0.
    static MlpModel init(std::span<const std::size_t> widths, Rng& rng);
    /// Same shapes, all parameters zero.
    static MlpModel zeros(std::span<const std::size_t> widths);

    std::vector<std::size_t> widths() const;
    std::size_t input_dim() const;
    std::size_t parameter_count() const;

    /// Throws std::invalid_argument if layer shapes do not chain or the last width is not 1.
    void validate() const;

    friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

using Model = std::variant<LinearModel, MlpModel>;

std::size_t input_dim(const Model& model);
std::size_t parameter_count(const Model& model);

GradientVector parameters(const Model& model);
/// Writes `theta` back into a copy of `model`; length must match.
Model with_parameters(const Model& model, std::span<const double> theta);

/// Phi(x_i) for every row of X (pre-activation logit for MLPs).
std::vector<double> forward(const Model& model, const Matrix& X);

/// grad_theta sum_i c_i Phi(x_i), with c held constant.
GradientVector backward_with_cotangent(const Model& model, const Matrix& X, std::span<const double> c);

/// Outputs of one forward pass plus whatever the backward pass needs
/// (MLP activations). Lets callers pick cotangents after seeing every
/// environment's outputs.
struct ForwardPass {
    std::vector<double> outputs;
    std::vector<Matrix> activations;  // MLP only: activations[l] is the input of layer l
};

ForwardPass forward_pass(const Model& model, const Matrix& X);

/// Same result as backward_with_cotangent(model, X, c) for the cached pass.
GradientVector backward_from(const Model& model, const Matrix& X, const ForwardPass& pass,
                             std::span<const double> c);

/// Checkpoint text format: a header line `linear D` or `mlp d0 d1 ... 1`,
/// then one parameter per line in flattening order, %.17g. Linear models
/// with a bias use the header `linear D bias`.
void save_checkpoint(const Model& model, std::ostream& os);
Model load_checkpoint(std::istream& is);

}  // namespace irmx
