#include "irmx/penalties.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace irmx {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double ez = std::exp(z);
    return ez / (1.0 + ez);
}

double mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

void require_envs(std::span<const EnvDataset> envs) {
    if (envs.empty()) throw std::invalid_argument("objective: at least one environment is required");
}

// Per-env quantities shared by value and gradient paths.
struct EnvPass {
    ForwardPass pass;
    std::vector<double> h;       // pi-gradients
    double risk = 0.0;
    double mean_h = 0.0;
    double j = 0.0;
};

EnvPass evaluate_env(const Model& model, const EnvDataset& env, LossKind loss) {
    check_loss_compatible(env, loss);
    EnvPass p;
    p.pass = forward_pass(model, env.X);
    const auto& out = p.pass.outputs;
    const std::size_t n = out.size();
    p.h.resize(n);
    double r = 0.0, hs = 0.0, h2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        r += sample_loss(out[i], env.y[i], loss);
        p.h[i] = sample_pi_gradient(out[i], env.y[i], loss);
        hs += p.h[i];
        h2 += p.h[i] * p.h[i];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    p.risk = r * inv_n;
    p.mean_h = hs * inv_n;
    p.j = h2 * inv_n;
    return p;
}

// Per-env weight on the J-penalty cotangent, or on the IRMv1 cotangent.
std::vector<double> penalty_env_weights(PenaltyKind kind, std::span<const double> J, const ExtrapolationParams& params) {
    switch (kind) {
        case PenaltyKind::None: return std::vector<double>(J.size(), 0.0);
        case PenaltyKind::IrmV1:
        case PenaltyKind::JIrmV1: return std::vector<double>(J.size(), 1.0);
        case PenaltyKind::Cmm: return c_mm_weights(J, params.alpha_min);
        case PenaltyKind::Cv: return c_v_weights(J, params.gamma);
    }
    throw std::logic_error("unknown PenaltyKind");
}

double penalty_from_terms(PenaltyKind kind, std::span<const double> J, std::span<const double> irm,
                          const ExtrapolationParams& params) {
    double s = 0.0;
    switch (kind) {
        case PenaltyKind::None: return 0.0;
        case PenaltyKind::IrmV1:
            for (double v : irm) s += v;
            return s;
        case PenaltyKind::JIrmV1:
            for (double v : J) s += v;
            return s;
        case PenaltyKind::Cmm: return c_mm(J, params.alpha_min);
        case PenaltyKind::Cv: return c_v(J, params.gamma);
    }
    throw std::logic_error("unknown PenaltyKind");
}

ObjectiveTerms run_objective(const Model& model, std::span<const EnvDataset> envs, LossKind loss,
                             const PenaltySettings& settings, bool with_grad, bool include_risk) {
    require_envs(envs);
    settings.validate(envs.size());

    std::vector<EnvPass> passes;
    passes.reserve(envs.size());
    ObjectiveTerms t;
    for (const auto& env : envs) {
        passes.push_back(evaluate_env(model, env, loss));
        t.risks.push_back(passes.back().risk);
        t.j_penalties.push_back(passes.back().j);
        t.irmv1_penalties.push_back(passes.back().mean_h * passes.back().mean_h);
    }
    t.penalty = penalty_from_terms(settings.kind, t.j_penalties, t.irmv1_penalties, settings.extrapolation);
    double risk_sum = 0.0;
    for (double r : t.risks) risk_sum += r;
    const double lambda = settings.kind == PenaltyKind::None ? 0.0 : settings.lambda;
    t.value = (include_risk ? risk_sum : 0.0) + lambda * t.penalty;
    if (!with_grad) return t;

    const std::vector<double> weights = penalty_env_weights(settings.kind, t.j_penalties, settings.extrapolation);
    t.grad.assign(parameter_count(model), 0.0);
    for (std::size_t e = 0; e < envs.size(); ++e) {
        const auto& env = envs[e];
        const auto& p = passes[e];
        const std::size_t n = p.h.size();
        const double inv_n = 1.0 / static_cast<double>(n);
        const double pw = lambda * weights[e];
        std::vector<double> c(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double out = p.pass.outputs[i];
            double ci = include_risk ? inv_n * sample_loss_derivative(out, env.y[i], loss) : 0.0;
            if (pw != 0.0) {
                const double dh = sample_pi_gradient_derivative(out, env.y[i], loss);
                const double factor = settings.kind == PenaltyKind::IrmV1 ? p.mean_h : p.h[i];
                ci += pw * 2.0 * inv_n * factor * dh;
            }
            c[i] = ci;
        }
        const GradientVector g = backward_from(model, env.X, p.pass, c);
        for (std::size_t k = 0; k < g.size(); ++k) t.grad[k] += g[k];
    }
    return t;
}

}  // namespace

std::string_view to_string(LossKind kind) {
    switch (kind) {
        case LossKind::SquaredError: return "squared_error";
        case LossKind::BinaryCrossEntropyWithLogit: return "bce_logit";
    }
    return "?";
}

std::string_view to_string(PenaltyKind kind) {
    switch (kind) {
        case PenaltyKind::None: return "none";
        case PenaltyKind::IrmV1: return "irmv1";
        case PenaltyKind::JIrmV1: return "j_irmv1";
        case PenaltyKind::Cmm: return "c_mm";
        case PenaltyKind::Cv: return "c_v";
    }
    return "?";
}

void PenaltySettings::validate(std::size_t n_envs) const {
    if (n_envs == 0) throw std::invalid_argument("penalty: at least one environment is required");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("penalty: lambda must be finite and >= 0");
    if (kind == PenaltyKind::Cmm && extrapolation.alpha_min * static_cast<double>(n_envs) > 1.0 + 1e-12)
        throw std::invalid_argument("penalty: alpha_min must satisfy alpha_min <= 1/|E| (got " +
                                    std::to_string(extrapolation.alpha_min) + " for |E|=" + std::to_string(n_envs) + ")");
    if (kind == PenaltyKind::Cv && !(extrapolation.gamma >= 0.0))
        throw std::invalid_argument("penalty: gamma must be >= 0");
}

void check_loss_compatible(const EnvDataset& env, LossKind loss) {
    if (env.X.rows() != env.y.size()) throw std::invalid_argument("dataset: X rows and y length differ");
    if (env.y.empty()) throw std::invalid_argument("dataset: empty environment");
    if (loss == LossKind::BinaryCrossEntropyWithLogit) {
        if (env.spec.kind == EnvKind::SemRegression)
            throw std::invalid_argument("loss: BCE-with-logit requires classification data");
        for (double y : env.y)
            if (y != 0.0 && y != 1.0) throw std::invalid_argument("loss: BCE-with-logit requires labels in {0,1}");
    } else if (env.spec.kind == EnvKind::SpuriousClassification) {
        throw std::invalid_argument("loss: squared error requires regression data");
    }
}

double sample_loss(double out, double y, LossKind loss, double pi) {
    const double z = pi * out;
    if (loss == LossKind::SquaredError) return (z - y) * (z - y);
    return std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::abs(z)));
}

double sample_loss_derivative(double out, double y, LossKind loss) {
    if (loss == LossKind::SquaredError) return 2.0 * (out - y);
    return sigmoid(out) - y;
}

double sample_pi_gradient(double out, double y, LossKind loss, double pi) {
    const double z = pi * out;
    if (loss == LossKind::SquaredError) return 2.0 * out * (z - y);
    return out * (sigmoid(z) - y);
}

double sample_pi_gradient_derivative(double out, double y, LossKind loss) {
    if (loss == LossKind::SquaredError) return 2.0 * (2.0 * out - y);
    const double s = sigmoid(out);
    return (s - y) + out * s * (1.0 - s);
}

double risk_at(const Model& model, const EnvDataset& env, LossKind loss, double pi) {
    check_loss_compatible(env, loss);
    const std::vector<double> out = forward(model, env.X);
    double r = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) r += sample_loss(out[i], env.y[i], loss, pi);
    return r / static_cast<double>(out.size());
}

double j_irm_at(const Model& model, const EnvDataset& env, LossKind loss, double pi) {
    check_loss_compatible(env, loss);
    const std::vector<double> out = forward(model, env.X);
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double h = sample_pi_gradient(out[i], env.y[i], loss, pi);
        s += h * h;
    }
    return s / static_cast<double>(out.size());
}

double risk(const Model& model, const EnvDataset& env, LossKind loss) { return risk_at(model, env, loss, 1.0); }

std::vector<double> pi_gradients(const Model& model, const EnvDataset& env, LossKind loss) {
    check_loss_compatible(env, loss);
    const std::vector<double> out = forward(model, env.X);
    std::vector<double> h(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) h[i] = sample_pi_gradient(out[i], env.y[i], loss);
    return h;
}

double irmv1_penalty(const Model& model, const EnvDataset& env, LossKind loss) {
    const double m = mean(pi_gradients(model, env, loss));
    return m * m;
}

double j_penalty(const Model& model, const EnvDataset& env, LossKind loss) { return j_irm_at(model, env, loss, 1.0); }

double c_mm(std::span<const double> J, double alpha_min) {
    if (J.empty()) throw std::invalid_argument("c_mm: empty penalty vector");
    const double n = static_cast<double>(J.size());
    if (alpha_min * n > 1.0 + 1e-12) throw std::invalid_argument("c_mm: alpha_min exceeds 1/|E|");
    double sum = 0.0;
    for (double v : J) sum += v;
    const double mx = *std::max_element(J.begin(), J.end());
    return (1.0 - alpha_min * n) * mx + alpha_min * sum;
}

double c_v(std::span<const double> J, double gamma) {
    if (J.empty()) throw std::invalid_argument("c_v: empty penalty vector");
    if (!(gamma >= 0.0)) throw std::invalid_argument("c_v: gamma must be >= 0");
    double sum = 0.0;
    for (double v : J) sum += v;
    const double m = sum / static_cast<double>(J.size());
    double var = 0.0;
    for (double v : J) var += (v - m) * (v - m);
    var /= static_cast<double>(J.size());
    return gamma * var + sum;
}

std::size_t c_mm_argmax(std::span<const double> J) {
    if (J.empty()) throw std::invalid_argument("c_mm_argmax: empty penalty vector");
    const double mx = *std::max_element(J.begin(), J.end());
    for (std::size_t e = 0; e < J.size(); ++e)
        if (mx - J[e] <= 1e-12) return e;
    return 0;  // unreachable: the maximum itself qualifies
}

std::vector<double> c_mm_weights(std::span<const double> J, double alpha_min) {
    if (J.empty()) throw std::invalid_argument("c_mm: empty penalty vector");
    const double n = static_cast<double>(J.size());
    if (alpha_min * n > 1.0 + 1e-12) throw std::invalid_argument("c_mm: alpha_min exceeds 1/|E|");
    std::vector<double> w(J.size(), alpha_min);
    w[c_mm_argmax(J)] += 1.0 - alpha_min * n;
    return w;
}

std::vector<double> c_v_weights(std::span<const double> J, double gamma) {
    if (J.empty()) throw std::invalid_argument("c_v: empty penalty vector");
    const double n = static_cast<double>(J.size());
    const double m = mean(J);
    std::vector<double> w(J.size());
    for (std::size_t e = 0; e < J.size(); ++e) w[e] = gamma * (2.0 / n) * (J[e] - m) + 1.0;
    return w;
}

GradientVector penalty_grad(const Model& model, std::span<const EnvDataset> envs, LossKind loss,
                            PenaltyKind kind, const ExtrapolationParams& params) {
    return run_objective(model, envs, loss, PenaltySettings{kind, 1.0, params}, true, false).grad;
}

double penalty_value(const Model& model, std::span<const EnvDataset> envs, LossKind loss, PenaltyKind kind,
                     const ExtrapolationParams& params) {
    return run_objective(model, envs, loss, PenaltySettings{kind, 1.0, params}, false, false).penalty;
}

ObjectiveTerms objective(const Model& model, std::span<const EnvDataset> envs, LossKind loss,
                         const PenaltySettings& settings) {
    return run_objective(model, envs, loss, settings, true, true);
}

ObjectiveTerms objective_value(const Model& model, std::span<const EnvDataset> envs, LossKind loss,
                               const PenaltySettings& settings) {
    return run_objective(model, envs, loss, settings, false, true);
}

}  // namespace irmx
