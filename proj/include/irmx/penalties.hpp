#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "irmx/data.hpp"
#include "irmx/models.hpp"

namespace irmx {

enum class LossKind { SquaredError, BinaryCrossEntropyWithLogit };

/// IrmV1: squared pi-gradient of the risk. JIrmV1: mean squared per-sample
/// pi-gradient. Cmm / Cv: extrapolated J-penalties. None: plain ERM.
enum class PenaltyKind { None, IrmV1, JIrmV1, Cmm, Cv };

std::string_view to_string(LossKind kind);
std::string_view to_string(PenaltyKind kind);

struct ExtrapolationParams {
    double alpha_min = 0.0;  // may be negative; must satisfy alpha_min <= 1/|E|
    double gamma = 0.0;      // >= 0

    friend bool operator==(const ExtrapolationParams&, const ExtrapolationParams&) = default;
};

/// Penalty part of an objective: sum_e R_e + lambda * penalty(kind).
struct PenaltySettings {
    PenaltyKind kind = PenaltyKind::None;
    double lambda = 0.0;
    ExtrapolationParams extrapolation{};

    /// Throws std::invalid_argument if the settings are infeasible for `n_envs` environments.
    void validate(std::size_t n_envs) const;

    friend bool operator==(const PenaltySettings&, const PenaltySettings&) = default;
};

/// Throws std::invalid_argument when `loss` cannot be used with `env`
/// (BCE requires labels in {0,1}; SquaredError requires regression data).
void check_loss_compatible(const EnvDataset& env, LossKind loss);

// -- Per-sample primitives on model outputs --------------------------------

/// l(pi * out, y).
double sample_loss(double out, double y, LossKind loss, double pi = 1.0);
/// d/d(out) l(out, y).
double sample_loss_derivative(double out, double y, LossKind loss);
/// d/dpi l(pi * out, y) at the given pi.
double sample_pi_gradient(double out, double y, LossKind loss, double pi = 1.0);
/// d/d(out) of sample_pi_gradient at pi = 1.
double sample_pi_gradient_derivative(double out, double y, LossKind loss);

// -- Environment-level quantities (pi fixed at 1) --------------------------

double risk(const Model& model, const EnvDataset& env, LossKind loss);
std::vector<double> pi_gradients(const Model& model, const EnvDataset& env, LossKind loss);
/// (mean_i h_i)^2.
double irmv1_penalty(const Model& model, const EnvDataset& env, LossKind loss);
/// mean_i h_i^2.
double j_penalty(const Model& model, const EnvDataset& env, LossKind loss);

/// Risk of the scaled predictor pi * Phi and the two-argument J-penalty.
/// Only the verification paths vary pi; training fixes pi = 1.
double risk_at(const Model& model, const EnvDataset& env, LossKind loss, double pi);
double j_irm_at(const Model& model, const EnvDataset& env, LossKind loss, double pi);

// -- Extrapolated penalties ------------------------------------------------

/// (1 - alpha_min |E|) max_e J_e + alpha_min sum_e J_e.
/// Throws std::invalid_argument if J is empty or alpha_min > 1/|E|.
double c_mm(std::span<const double> J, double alpha_min);

/// gamma Var(J) + sum_e J_e with Var normalized by 1/|E|.
double c_v(std::span<const double> J, double gamma);

/// Index receiving the (1 - alpha_min |E|) weight in the C_mm gradient:
/// the lowest index whose J is within 1e-12 of the maximum.
std::size_t c_mm_argmax(std::span<const double> J);

/// dC/dJ_e for the extrapolated penalties (subgradient for C_mm at ties).
std::vector<double> c_mm_weights(std::span<const double> J, double alpha_min);
std::vector<double> c_v_weights(std::span<const double> J, double gamma);

// -- Gradients -------------------------------------------------------------

/// Gradient of the penalty term (without lambda):
///   IrmV1 / JIrmV1: sum over envs of the per-env penalty;
///   Cmm / Cv: the extrapolated penalty of the per-env J values;
///   None: zero.
GradientVector penalty_grad(const Model& model, std::span<const EnvDataset> envs, LossKind loss,
                            PenaltyKind kind, const ExtrapolationParams& params);

/// Value of the penalty term matching penalty_grad.
double penalty_value(const Model& model, std::span<const EnvDataset> envs, LossKind loss,
                     PenaltyKind kind, const ExtrapolationParams& params);

struct ObjectiveTerms {
    double value = 0.0;
    GradientVector grad;
    std::vector<double> risks;        // R_e per env
    std::vector<double> j_penalties;  // J_e per env
    std::vector<double> irmv1_penalties;
    double penalty = 0.0;             // penalty term before lambda
};

/// value = sum_e R_e + lambda * penalty(kind), with its gradient. One
/// forward and one cotangent backward pass per environment.
ObjectiveTerms objective(const Model& model, std::span<const EnvDataset> envs, LossKind loss,
                         const PenaltySettings& settings);

/// Same quantities without the gradient.
ObjectiveTerms objective_value(const Model& model, std::span<const EnvDataset> envs, LossKind loss,
                               const PenaltySettings& settings);

}  // namespace irmx
