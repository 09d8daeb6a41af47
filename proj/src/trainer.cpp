#include "irmx/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

namespace irmx {

namespace {

// Stream layout under the grid-search base seed.
constexpr std::uint64_t kSplitStreamBase = 1000;
constexpr std::uint64_t kConfigStreamBase = 2000;

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

PenaltySettings effective_settings(const ObjectiveConfig& cfg, std::size_t update) {
    PenaltySettings s = cfg.penalty_settings();
    if (update <= cfg.penalty_anneal_iters) s.lambda = 0.0;
    return s;
}

double mean_validation_risk(const Model& model, std::span<const EnvDataset> val, LossKind loss) {
    double s = 0.0;
    for (const auto& env : val) s += risk(model, env, loss);
    return s / static_cast<double>(val.size());
}

// Runs fn(i) for i in [0, count) on up to hardware_concurrency threads.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    const std::size_t workers =
        std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace

Model ModelSpec::initialize(std::size_t input_dim, Rng& rng) const {
    if (kind == Kind::Linear) {
        LinearModel m = LinearModel::zeros(input_dim, linear_bias);
        std::fill(m.w.begin(), m.w.end(), linear_init);
        return m;
    }
    std::vector<std::size_t> widths{input_dim};
    widths.insert(widths.end(), hidden.begin(), hidden.end());
    widths.push_back(1);
    return MlpModel::init(widths, rng);
}

void ObjectiveConfig::validate(std::size_t n_envs) const {
    penalty_settings().validate(n_envs);
    if (iterations < 1) throw std::invalid_argument("ObjectiveConfig: iterations must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw std::invalid_argument("ObjectiveConfig: learning_rate must be positive");
    if (penalty_anneal_iters >= iterations)
        throw std::invalid_argument("ObjectiveConfig: penalty_anneal_iters must be < iterations");
    if (log_stride < 1) throw std::invalid_argument("ObjectiveConfig: log_stride must be >= 1");
    if (checkpoint_tail > iterations / log_stride)
        throw std::invalid_argument("ObjectiveConfig: checkpoint_tail exceeds the number of logged iterations");
}

ObjectiveTerms objective(const Model& model, std::span<const EnvDataset> envs, const ObjectiveConfig& cfg) {
    return objective(model, envs, cfg.loss, cfg.penalty_settings());
}

TrainReport train_from(std::span<const EnvDataset> envs, const ObjectiveConfig& cfg, Model initial) {
    if (envs.empty()) throw std::invalid_argument("train: at least one environment is required");
    cfg.validate(envs.size());
    for (const auto& env : envs)
        if (env.dim() != input_dim(initial)) throw std::invalid_argument("train: model and data dimensions differ");

    TrainReport report;
    report.config = cfg;
    report.model = std::move(initial);
    std::vector<double> theta = parameters(report.model);
    std::vector<double> m1(theta.size(), 0.0), m2(theta.size(), 0.0);
    double beta1_pow = 1.0, beta2_pow = 1.0;

    const std::size_t logged_total = cfg.iterations / cfg.log_stride;
    report.trace.reserve(logged_total);

    for (std::size_t t = 1; t <= cfg.iterations; ++t) {
        const PenaltySettings settings = effective_settings(cfg, t);
        const ObjectiveTerms terms = objective(report.model, envs, cfg.loss, settings);
        if (!std::isfinite(terms.value) || !all_finite(terms.grad))
            throw TrainingError("train: non-finite objective at update " + std::to_string(t), t);

        if (cfg.optimizer == OptimizerKind::GradientDescent) {
            for (std::size_t k = 0; k < theta.size(); ++k) theta[k] -= cfg.learning_rate * terms.grad[k];
        } else {
            const auto& a = cfg.adam;
            beta1_pow *= a.beta1;
            beta2_pow *= a.beta2;
            for (std::size_t k = 0; k < theta.size(); ++k) {
                const double g = terms.grad[k];
                m1[k] = a.beta1 * m1[k] + (1.0 - a.beta1) * g;
                m2[k] = a.beta2 * m2[k] + (1.0 - a.beta2) * g * g;
                const double mhat = m1[k] / (1.0 - beta1_pow);
                const double vhat = m2[k] / (1.0 - beta2_pow);
                theta[k] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + a.epsilon);
            }
        }
        report.model = with_parameters(report.model, theta);

        if (t % cfg.log_stride == 0) {
            const ObjectiveTerms after = objective_value(report.model, envs, cfg.loss, settings);
            if (!std::isfinite(after.value))
                throw TrainingError("train: non-finite objective after update " + std::to_string(t), t);
            report.trace.push_back({t, after.risks, after.j_penalties, after.value});
            if (report.trace.size() + cfg.checkpoint_tail > logged_total)
                report.checkpoints.push_back({t, report.model});
        }
    }
    if (!all_finite(theta)) throw TrainingError("train: non-finite parameters", cfg.iterations);
    return report;
}

TrainReport train(std::span<const EnvDataset> envs, const ObjectiveConfig& cfg, Rng& rng) {
    if (envs.empty()) throw std::invalid_argument("train: at least one environment is required");
    const std::uint64_t seed = rng.seed(), stream = rng.stream();
    Model initial = cfg.model.initialize(envs.front().dim(), rng);
    TrainReport report = train_from(envs, cfg, std::move(initial));
    report.seed = seed;
    report.stream = stream;
    return report;
}

GridSearchResult grid_search(std::span<const EnvDataset> envs_train, std::span<const ObjectiveConfig> grid,
                             double validation_fraction, const Rng& rng) {
    if (grid.empty()) throw std::invalid_argument("grid_search: empty grid");
    if (envs_train.empty()) throw std::invalid_argument("grid_search: no training environments");
    for (const auto& cfg : grid) cfg.validate(envs_train.size());

    const std::uint64_t seed = rng.seed();
    std::vector<EnvDataset> fit, val;
    for (std::size_t e = 0; e < envs_train.size(); ++e) {
        Rng split_rng(seed, kSplitStreamBase + e);
        auto [tr, va] = split_validation(envs_train[e], validation_fraction, split_rng);
        fit.push_back(std::move(tr));
        val.push_back(std::move(va));
    }

    GridSearchResult result;
    result.entries.resize(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        GridEntry& entry = result.entries[i];
        entry.config = grid[i];
        try {
            Rng cfg_rng(seed, kConfigStreamBase + i);
            const TrainReport r = train(fit, grid[i], cfg_rng);
            entry.validation_risk = mean_validation_risk(r.model, val, grid[i].loss);
            const ObjectiveTerms vt = objective_value(r.model, val, grid[i].loss, grid[i].penalty_settings());
            entry.validation_risk_plus_penalty =
                entry.validation_risk + (grid[i].penalty_kind == PenaltyKind::None ? 0.0 : grid[i].lambda * vt.penalty);
            entry.diverged = !std::isfinite(entry.validation_risk);
        } catch (const TrainingError&) {
            entry.diverged = true;
        }
        if (entry.diverged) entry.validation_risk = entry.validation_risk_plus_penalty = NAN;
    });

    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (result.entries[i].diverged) continue;
        if (!best || result.entries[i].validation_risk < result.entries[*best].validation_risk) best = i;
    }
    if (!best) throw TrainingError("grid_search: every configuration diverged", 0);

    result.best_index = *best;
    result.best = grid[*best];
    Rng final_rng(seed, kConfigStreamBase + *best);
    result.report = train(envs_train, result.best, final_rng);
    return result;
}

std::vector<ObjectiveConfig> expand_grid(const ObjectiveConfig& base, std::span<const double> lambdas,
                                         std::span<const double> alpha_mins, std::span<const double> gammas) {
    std::vector<ObjectiveConfig> out;
    auto with = [&](double lambda, double alpha_min, double gamma) {
        ObjectiveConfig c = base;
        c.lambda = lambda;
        c.extrapolation = {alpha_min, gamma};
        out.push_back(c);
    };
    switch (base.penalty_kind) {
        case PenaltyKind::None: with(0.0, 0.0, 0.0); break;
        case PenaltyKind::IrmV1:
        case PenaltyKind::JIrmV1:
            for (double l : lambdas) with(l, 0.0, 0.0);
            break;
        case PenaltyKind::Cmm:
            for (double l : lambdas)
                for (double a : alpha_mins) with(l, a, 0.0);
            break;
        case PenaltyKind::Cv:
            for (double l : lambdas)
                for (double g : gammas) with(l, 0.0, g);
            break;
    }
    return out;
}

}  // namespace irmx
