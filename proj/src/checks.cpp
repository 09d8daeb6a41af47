#include "irmx/checks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "irmx/data.hpp"
#include "irmx/models.hpp"
#include "irmx/oracles.hpp"
#include "irmx/penalties.hpp"
#include "irmx/trainer.hpp"

namespace irmx {

namespace {

using nlohmann::json;

// Stream families under the check seed, kept apart so adding trials to one
// property never shifts another.
constexpr std::uint64_t kJensenStream = 10;
constexpr std::uint64_t kTheoremStream = 20;
constexpr std::uint64_t kLpStream = 30;
constexpr std::uint64_t kGradStream = 40;
constexpr std::uint64_t kEnvStreamBase = 1u << 20;

double uniform_in(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) { return lo + static_cast<std::size_t>(rng.below(hi - lo + 1)); }

// A small random environment: SEM for SquaredError, the classification
// analogue for BCE. Data come from their own stream so a counterexample
// can name (seed, stream, spec) instead of carrying the matrix.
struct RandomEnv {
    EnvDataset env;
    std::uint64_t stream = 0;
};

RandomEnv random_env(Rng& rng, LossKind loss, std::uint64_t seed, std::uint64_t stream, std::size_t d) {
    const std::size_t n = pick(rng, 8, 40);
    EnvSpec spec = loss == LossKind::SquaredError ? EnvSpec::sem(uniform_in(rng, 0.1, 1.5), n, d)
                                                  : EnvSpec::cls(uniform_in(rng, 0.0, 1.0), n);
    Rng data(seed, kEnvStreamBase + stream);
    return {generate_env(spec, data), kEnvStreamBase + stream};
}

Model random_model(Rng& rng, std::size_t input_dim, bool mlp) {
    if (!mlp) {
        LinearModel m = LinearModel::zeros(input_dim, rng.bernoulli(0.5));
        for (double& w : m.w) w = sample_normal(rng, 0.0, 0.7);
        if (m.use_bias) m.bias = sample_normal(rng, 0.0, 0.5);
        return m;
    }
    std::vector<std::size_t> widths{input_dim, pick(rng, 2, 5)};
    if (rng.bernoulli(0.5)) widths.push_back(pick(rng, 2, 4));
    widths.push_back(1);
    MlpModel m = MlpModel::init(widths, rng);
    for (auto& layer : m.layers)
        for (double& b : layer.bias) b = sample_normal(rng, 0.0, 0.3);
    return m;
}

std::string checkpoint_text(const Model& model) {
    std::ostringstream os;
    save_checkpoint(model, os);
    return os.str();
}

// Smallest |pre-activation| over every hidden unit and row. Central
// differences across a ReLU kink measure a secant, not the gradient.
double kink_margin(const MlpModel& m, std::span<const EnvDataset> envs) {
    double margin = INFINITY;
    for (const auto& env : envs) {
        for (std::size_t i = 0; i < env.n(); ++i) {
            std::vector<double> a(env.X.row(i).begin(), env.X.row(i).end());
            for (std::size_t l = 0; l + 1 < m.layers.size(); ++l) {
                const auto& layer = m.layers[l];
                std::vector<double> z(layer.bias);
                for (std::size_t r = 0; r < z.size(); ++r)
                    for (std::size_t c = 0; c < a.size(); ++c) z[r] += layer.weight(r, c) * a[c];
                for (double& v : z) {
                    margin = std::min(margin, std::abs(v));
                    v = std::max(v, 0.0);
                }
                a = std::move(z);
            }
        }
    }
    return margin;
}

json spec_json(const EnvSpec& s) {
    json j;
    j["kind"] = s.kind == EnvKind::SemRegression ? "sem" : "cls";
    if (s.kind == EnvKind::SemRegression) {
        j["e"] = s.noise_scale;
        j["d"] = s.d;
    } else {
        j["p_flip"] = s.p_flip;
        j["label_noise"] = s.label_noise;
    }
    j["n"] = s.n;
    return j;
}

json env_json(const RandomEnv& r, std::uint64_t seed) {
    return {{"seed", seed}, {"stream", r.stream}, {"spec", spec_json(r.env.spec)}};
}

}  // namespace

PropertyResult check_jensen(std::size_t trials, std::uint64_t seed, bool flip) {
    PropertyResult res;
    res.name = flip ? "jensen (flipped)" : "jensen";
    Rng rng(seed, kJensenStream);
    res.worst = -INFINITY;
    for (std::size_t t = 0; t < trials; ++t) {
        const LossKind loss = t % 2 == 0 ? LossKind::SquaredError : LossKind::BinaryCrossEntropyWithLogit;
        const RandomEnv r = random_env(rng, loss, seed, t, pick(rng, 1, 3));
        const Model model = random_model(rng, r.env.dim(), t % 4 >= 2);
        const double irm = irmv1_penalty(model, r.env, loss);
        const double jp = j_penalty(model, r.env, loss);
        const double gap = flip ? jp - irm : irm - jp;
        res.worst = std::max(res.worst, gap);
        ++res.cases;
        if (gap > 1e-12) {
            res.passed = false;
            res.counterexample = {{"property", res.name}, {"trial", t}, {"loss", std::string(to_string(loss))},
                                  {"env", env_json(r, seed)}, {"model", checkpoint_text(model)},
                                  {"irmv1_penalty", irm}, {"j_penalty", jp}};
            break;
        }
    }
    return res;
}

PropertyResult check_theorem_bound(std::size_t trials, std::uint64_t seed) {
    PropertyResult res;
    res.name = "theorem_bound";
    std::vector<EnvDataset> envs;
    const double es[] = {0.2, 2.0};
    for (std::size_t e = 0; e < 2; ++e) {
        Rng data(seed, e);
        envs.push_back(generate_sem_env(EnvSpec::sem(es[e], 1000, 5), data));
    }
    Rng rng(seed, kTheoremStream);
    const double scales[] = {0.1, 1.0, 10.0};
    res.worst = -INFINITY;
    for (std::size_t t = 0; t < trials; ++t) {
        LinearModel m = LinearModel::zeros(10);
        const double s = scales[t % 3];
        for (std::size_t j = 0; j < m.w.size(); ++j) m.w[j] = (t % 6 == 5 && j < 5 ? 1.0 : 0.0) + sample_normal(rng, 0.0, s);
        const Model model = m;

        double L = 0.0, delta = 0.0;
        for (const auto& env : envs) {
            const auto out = forward(model, env.X);
            double sq = 0.0;
            for (double o : out) sq += o * o;
            L = std::max(L, 2.0 * sq / static_cast<double>(out.size()));
            delta += risk(model, env, LossKind::SquaredError);
        }
        for (std::size_t e = 0; e < envs.size(); ++e) {
            const double pen = irmv1_penalty(model, envs[e], LossKind::SquaredError);
            const double gap = pen - 2.0 * L * delta;
            res.worst = std::max(res.worst, gap);
            if (gap > 1e-9) {
                res.passed = false;
                res.counterexample = {{"property", res.name}, {"trial", t}, {"env_index", e},
                                      {"model", checkpoint_text(model)}, {"penalty", pen}, {"L", L}, {"delta", delta}};
                ++res.cases;
                return res;
            }
        }
        ++res.cases;
    }
    return res;
}

PropertyResult check_lp_equivalence(std::size_t trials, std::uint64_t seed) {
    PropertyResult res;
    res.name = "lp_equivalence";
    Rng rng(seed, kLpStream);
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t m = 2 + t % 5;
        std::vector<double> J(m);
        for (double& j : J) j = rng.uniform();
        const double alpha = uniform_in(rng, -2.0, 1.0 / static_cast<double>(m));
        const double closed = c_mm(J, alpha);
        const double lp = lp_vertex_max(J, alpha).value;
        const double diff = std::abs(closed - lp);
        res.worst = std::max(res.worst, diff);
        ++res.cases;
        if (diff > 1e-12) {
            res.passed = false;
            res.counterexample = {{"property", res.name}, {"trial", t}, {"J", J}, {"alpha_min", alpha},
                                  {"c_mm", closed}, {"lp_vertex_max", lp}};
            break;
        }
    }
    return res;
}

PropertyResult check_gradients(std::size_t trials_per_kind, std::uint64_t seed) {
    PropertyResult res;
    res.name = "gradients";
    Rng rng(seed, kGradStream);
    const PenaltyKind kinds[] = {PenaltyKind::None, PenaltyKind::IrmV1, PenaltyKind::JIrmV1, PenaltyKind::Cmm,
                                 PenaltyKind::Cv};
    std::uint64_t stream = 0;
    for (PenaltyKind kind : kinds) {
        for (bool mlp : {false, true}) {
            for (std::size_t t = 0; t < trials_per_kind; ++t) {
                const LossKind loss = t % 2 == 0 ? LossKind::SquaredError : LossKind::BinaryCrossEntropyWithLogit;
                const std::size_t n_envs = pick(rng, 2, 3);
                const std::size_t d = pick(rng, 1, 3);
                std::vector<RandomEnv> generated;
                std::vector<EnvDataset> envs;
                for (std::size_t e = 0; e < n_envs; ++e) {
                    generated.push_back(random_env(rng, loss, seed, 100000 + stream++, d));
                    envs.push_back(generated.back().env);
                }
                Model model = random_model(rng, envs.front().dim(), mlp);
                while (mlp && kink_margin(std::get<MlpModel>(model), envs) < 1e-3)
                    model = random_model(rng, envs.front().dim(), true);
                PenaltySettings s{kind, uniform_in(rng, 0.1, 2.0), {}};
                if (kind == PenaltyKind::Cmm) s.extrapolation.alpha_min = uniform_in(rng, -3.0, 1.0 / n_envs);
                if (kind == PenaltyKind::Cv) s.extrapolation.gamma = uniform_in(rng, 0.0, 5.0);

                const ObjectiveTerms terms = objective(model, envs, loss, s);
                const auto f = [&](std::span<const double> theta) {
                    return objective_value(with_parameters(model, theta), envs, loss, s).value;
                };
                const auto numeric = finite_diff_grad(f, parameters(model));
                const double err = max_relative_error(terms.grad, numeric);
                res.worst = std::max(res.worst, err);
                ++res.cases;
                if (err > 1e-5) {
                    json env_list = json::array();
                    for (const auto& g : generated) env_list.push_back(env_json(g, seed));
                    res.passed = false;
                    res.counterexample = {{"property", res.name},
                                          {"penalty", std::string(to_string(kind))},
                                          {"loss", std::string(to_string(loss))},
                                          {"lambda", s.lambda},
                                          {"alpha_min", s.extrapolation.alpha_min},
                                          {"gamma", s.extrapolation.gamma},
                                          {"envs", env_list},
                                          {"model", checkpoint_text(model)},
                                          {"analytic", terms.grad},
                                          {"numeric", numeric},
                                          {"max_relative_error", err}};
                    return res;
                }
            }
        }
    }
    return res;
}

PropertyResult check_ols_convergence(std::uint64_t seed) {
    PropertyResult res;
    res.name = "ols_convergence";
    std::vector<EnvDataset> envs;
    const double es[] = {0.2, 2.0};
    for (std::size_t e = 0; e < 2; ++e) {
        Rng data(seed, e);
        envs.push_back(generate_sem_env(EnvSpec::sem(es[e], 1000, 5), data));
    }
    ObjectiveConfig cfg;
    cfg.learning_rate = 1e-3;
    cfg.iterations = 20000;
    cfg.log_stride = cfg.iterations;
    const TrainReport report = train_from(envs, cfg, LinearModel::zeros(10));
    const LinearModel& got = std::get<LinearModel>(report.model);
    const LinearModel want = least_squares_fit(envs);
    for (std::size_t j = 0; j < want.w.size(); ++j) res.worst = std::max(res.worst, std::abs(got.w[j] - want.w[j]));
    res.cases = want.w.size();
    if (res.worst > 1e-3) {
        res.passed = false;
        res.counterexample = {{"property", res.name}, {"seed", seed}, {"trained", got.w}, {"oracle", want.w},
                              {"max_abs_diff", res.worst}};
    }
    return res;
}

}  // namespace irmx
