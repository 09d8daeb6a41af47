#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "irmx/data.hpp"
#include "irmx/models.hpp"
#include "irmx/penalties.hpp"
#include "irmx/rng.hpp"

namespace irmx {

enum class OptimizerKind { GradientDescent, Adam };

/// Architecture the trainer initializes. Linear models start with every
/// weight equal to linear_init (bias 0); MLPs draw N(0, 1/fan_in) weights
/// from the training RNG.
struct ModelSpec {
    enum class Kind { Linear, Mlp } kind = Kind::Linear;
    bool linear_bias = false;
    double linear_init = 0.0;
    std::vector<std::size_t> hidden;  // MLP hidden widths; input and output (1) are implied

    Model initialize(std::size_t input_dim, Rng& rng) const;

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct AdamSettings {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    friend bool operator==(const AdamSettings&, const AdamSettings&) = default;
};

struct ObjectiveConfig {
    PenaltyKind penalty_kind = PenaltyKind::None;
    double lambda = 0.0;
    ExtrapolationParams extrapolation{};
    LossKind loss = LossKind::SquaredError;
    OptimizerKind optimizer = OptimizerKind::GradientDescent;
    AdamSettings adam{};
    double learning_rate = 1e-3;
    std::size_t iterations = 20000;
    std::size_t penalty_anneal_iters = 0;
    ModelSpec model{};
    std::size_t log_stride = 1;
    /// Number of trailing logged iterations whose model is kept in the report.
    std::size_t checkpoint_tail = 0;

    PenaltySettings penalty_settings() const { return {penalty_kind, lambda, extrapolation}; }

    /// Throws std::invalid_argument unless the config is usable with `n_envs` environments.
    void validate(std::size_t n_envs) const;

    friend bool operator==(const ObjectiveConfig&, const ObjectiveConfig&) = default;
};

/// Values logged after update number `iteration` (1-based).
struct TraceRecord {
    std::size_t iteration = 0;
    std::vector<double> risks;
    std::vector<double> j_penalties;
    double objective = 0.0;
};

struct Checkpoint {
    std::size_t iteration = 0;
    Model model;
};

struct TrainReport {
    Model model;
    std::vector<TraceRecord> trace;
    std::vector<Checkpoint> checkpoints;  // the last cfg.checkpoint_tail logged iterations
    ObjectiveConfig config;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

/// Divergence during training: the objective or gradient became non-finite.
struct TrainingError : std::runtime_error {
    TrainingError(const std::string& what, std::size_t iteration)
        : std::runtime_error(what), iteration(iteration) {}
    std::size_t iteration;
};

/// The objective the trainer minimizes, with effective lambda applied.
ObjectiveTerms objective(const Model& model, std::span<const EnvDataset> envs, const ObjectiveConfig& cfg);

/// Full-batch training from a given starting model.
///
/// Update t (1-based) uses lambda_eff = 0 while t <= penalty_anneal_iters,
/// cfg.lambda afterwards. After update t, when t % log_stride == 0, the
/// model is evaluated (with the same lambda_eff) and a TraceRecord appended.
/// Throws TrainingError carrying the update index if the objective or
/// its gradient is non-finite.
TrainReport train_from(std::span<const EnvDataset> envs, const ObjectiveConfig& cfg, Model initial);

/// Initializes cfg.model from `rng` and trains.
TrainReport train(std::span<const EnvDataset> envs, const ObjectiveConfig& cfg, Rng& rng);

struct GridEntry {
    ObjectiveConfig config;
    bool diverged = false;
    double validation_risk = 0.0;               // selection score: mean validation risk (NaN if diverged)
    double validation_risk_plus_penalty = 0.0;  // logged alternative score (NaN if diverged)
};

struct GridSearchResult {
    ObjectiveConfig best;
    std::size_t best_index = 0;
    TrainReport report;  // the winner retrained on the full training data
    std::vector<GridEntry> entries;
};

/// Splits every env with split_validation (stream 0 of `rng`'s seed family,
/// see implementation), trains each config on the training parts, scores
/// the mean validation risk, and retrains the lowest-scoring config on the
/// full data. Diverged configs are disqualified; ties keep grid order.
/// Configs are evaluated concurrently; results are reduced in grid order.
/// Throws std::invalid_argument for an empty grid and TrainingError if
/// every config (or the final retrain) diverges.
GridSearchResult grid_search(std::span<const EnvDataset> envs_train, std::span<const ObjectiveConfig> grid,
                             double validation_fraction, const Rng& rng);

/// Cartesian product helper used by the CLI: one config per
/// (lambda, alpha_min) for Cmm, per (lambda, gamma) for Cv, per lambda for
/// IrmV1 / JIrmV1, and a single lambda = 0 config for None.
std::vector<ObjectiveConfig> expand_grid(const ObjectiveConfig& base, std::span<const double> lambdas,
                                         std::span<const double> alpha_mins, std::span<const double> gammas);

}  // namespace irmx
