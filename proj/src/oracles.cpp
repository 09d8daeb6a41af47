#include "irmx/oracles.hpp"

#include <algorithm>
#include <cmath>

namespace irmx {

std::vector<double> finite_diff_grad(const ScalarFunctionHandle& f, std::span<const double> theta, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("finite_diff_grad: step must be positive");
    std::vector<double> x(theta.begin(), theta.end());
    std::vector<double> g(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double orig = x[k];
        x[k] = orig + step;
        const double fp = f(x);
        x[k] = orig - step;
        const double fm = f(x);
        x[k] = orig;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw OracleError("finite_diff_grad: non-finite function value at coordinate " + std::to_string(k));
        g[k] = (fp - fm) / (2.0 * step);
    }
    return g;
}

double max_relative_error(std::span<const double> analytic, std::span<const double> numeric) {
    if (analytic.size() != numeric.size()) throw std::invalid_argument("max_relative_error: length mismatch");
    double worst = 0.0;
    for (std::size_t k = 0; k < analytic.size(); ++k)
        worst = std::max(worst, std::abs(analytic[k] - numeric[k]) / std::max(1.0, std::abs(analytic[k])));
    return worst;
}

LpVertexResult lp_vertex_max(std::span<const double> J, double alpha_min) {
    const std::size_t m = J.size();
    if (m == 0) throw OracleError("lp_vertex_max: empty J");
    const double slack = 1.0 - alpha_min * static_cast<double>(m);
    if (slack < -1e-12) throw OracleError("lp_vertex_max: alpha_min > 1/|E| leaves the feasible set empty");

    LpVertexResult best;
    bool first = true;
    std::vector<double> vertex(m);
    for (std::size_t k = 0; k < m; ++k) {
        std::fill(vertex.begin(), vertex.end(), alpha_min);
        vertex[k] += slack;
        double value = 0.0;
        for (std::size_t e = 0; e < m; ++e) value += vertex[e] * J[e];
        if (first || value > best.value) {
            best.value = value;
            best.vertex = vertex;
            first = false;
        }
    }
    return best;
}

LinearModel least_squares_fit(std::span<const EnvDataset> envs) {
    if (envs.empty()) throw OracleError("least_squares_fit: no environments");
    const std::size_t p = envs.front().X.cols();
    std::vector<double> A(p * p, 0.0), b(p, 0.0);
    for (const auto& env : envs) {
        if (env.X.cols() != p) throw OracleError("least_squares_fit: environments disagree on dimension");
        for (std::size_t i = 0; i < env.X.rows(); ++i) {
            auto x = env.X.row(i);
            for (std::size_t r = 0; r < p; ++r) {
                b[r] += x[r] * env.y[i];
                for (std::size_t c = 0; c <= r; ++c) A[r * p + c] += x[r] * x[c];
            }
        }
    }

    // In-place Cholesky A = L L^T on the lower triangle.
    double max_diag = 0.0;
    for (std::size_t r = 0; r < p; ++r) max_diag = std::max(max_diag, A[r * p + r]);
    const double tol = 1e-12 * std::max(max_diag, 1e-300);
    for (std::size_t j = 0; j < p; ++j) {
        double d = A[j * p + j];
        for (std::size_t k = 0; k < j; ++k) d -= A[j * p + k] * A[j * p + k];
        if (!(d > tol)) throw OracleError("least_squares_fit: design matrix is rank deficient");
        const double ljj = std::sqrt(d);
        A[j * p + j] = ljj;
        for (std::size_t i = j + 1; i < p; ++i) {
            double s = A[i * p + j];
            for (std::size_t k = 0; k < j; ++k) s -= A[i * p + k] * A[j * p + k];
            A[i * p + j] = s / ljj;
        }
    }
    // Forward then back substitution.
    std::vector<double> z(p);
    for (std::size_t i = 0; i < p; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= A[i * p + k] * z[k];
        z[i] = s / A[i * p + i];
    }
    LinearModel model = LinearModel::zeros(p);
    for (std::size_t i = p; i-- > 0;) {
        double s = z[i];
        for (std::size_t k = i + 1; k < p; ++k) s -= A[k * p + i] * model.w[k];
        model.w[i] = s / A[i * p + i];
    }
    return model;
}

double naive_squared_risk(const LinearModel& model, const EnvDataset& env) {
    double total = 0.0;
    for (std::size_t i = 0; i < env.X.rows(); ++i) {
        double pred = model.use_bias ? model.bias : 0.0;
        for (std::size_t j = 0; j < model.w.size(); ++j) pred += model.w[j] * env.X(i, j);
        total += (pred - env.y[i]) * (pred - env.y[i]);
    }
    return total / static_cast<double>(env.X.rows());
}

}  // namespace irmx
