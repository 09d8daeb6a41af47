#pragma once

// Independent verification paths. Nothing here calls into the penalty or
// training code; the tests compare the two sides.

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "irmx/data.hpp"
#include "irmx/models.hpp"

namespace irmx {

struct OracleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Deterministic, side-effect-free map from a parameter vector to a real.
using ScalarFunctionHandle = std::function<double(std::span<const double>)>;

/// Central differences (f(theta + h e_k) - f(theta - h e_k)) / (2h) per coordinate.
/// Throws std::invalid_argument for step <= 0 and OracleError if f is not finite.
std::vector<double> finite_diff_grad(const ScalarFunctionHandle& f, std::span<const double> theta, double step = 1e-5);

/// Relative error |a - b| / max(1, |a|), maximized over coordinates.
double max_relative_error(std::span<const double> analytic, std::span<const double> numeric);

struct LpVertexResult {
    double value = 0.0;
    std::vector<double> vertex;
};

/// max over A = {alpha : sum alpha = 1, alpha_e >= alpha_min} of alpha . J.
///
/// A is the simplex scaled by s = 1 - alpha_min |E| and translated by
/// alpha_min 1, so its vertices are alpha_min 1 + s e_k (k = 1..|E|), and a
/// linear function attains its maximum over a polytope at a vertex. Ties keep
/// the first maximizing vertex. Throws OracleError if alpha_min > 1/|E|.
LpVertexResult lp_vertex_max(std::span<const double> J, double alpha_min);

/// Pooled ordinary least squares (no intercept) by the normal equations
/// X^T X w = X^T y, solved with a Cholesky factorization. Throws
/// OracleError when X^T X is not numerically positive definite.
LinearModel least_squares_fit(std::span<const EnvDataset> envs);

/// Naive left-to-right mean of squared residuals, used as an accumulation
/// oracle for the risk of a linear model.
double naive_squared_risk(const LinearModel& model, const EnvDataset& env);

}  // namespace irmx
