#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "irmx/data.hpp"
#include "irmx/models.hpp"
#include "irmx/trainer.hpp"

namespace irmx {

inline constexpr std::size_t kDefaultCalibrationBins = 15;

/// (1/d) ||w_inv - 1_d||^2 where w_inv = w[0..d). Requires w.size() == 2d.
double causal_error(const LinearModel& model, std::size_t d);
/// (1/d) ||w_spu||^2 where w_spu = w[d..2d).
double noncausal_error(const LinearModel& model, std::size_t d);

/// Fraction of samples with (logit > 0) == (label == 1). A logit of exactly
/// zero predicts class 0.
double accuracy(std::span<const double> logits, std::span<const double> labels);

struct CalibrationInput {
    std::vector<double> confidences;  // each in [0, 1]
    std::vector<int> correct;         // each 0 or 1

    /// Throws std::invalid_argument on length mismatch or out-of-range values.
    void validate() const;
};

/// Binary single-logit predictions: confidence max(s, 1 - s) with s = sigmoid(z),
/// correct iff the predicted class (z > 0) equals the label.
CalibrationInput calibration_from_logits(std::span<const double> logits, std::span<const double> labels);

/// Equal-width ECE. Bin b (0-based) of B covers (b/B, (b+1)/B], except bin 0
/// which also contains 0. Empty bins contribute nothing.
double ece(const CalibrationInput& input, std::size_t n_bins = kDefaultCalibrationBins);

/// Adaptive (equal-count) ECE. Samples are sorted by (confidence, correct);
/// bins are contiguous groups whose sizes differ by at most one, the first
/// n mod B bins taking the extra sample. ACE = (1/B) sum_b |acc_b - conf_b|.
/// Throws std::invalid_argument if n_bins > n or n_bins == 0.
double ace(const CalibrationInput& input, std::size_t n_bins = kDefaultCalibrationBins);

struct ClassificationMetrics {
    double accuracy = 0.0;
    double ece = 0.0;
    double ace = 0.0;
};

/// Metrics of `model` on the pooled rows of `envs`.
ClassificationMetrics evaluate_classification(const Model& model, std::span<const EnvDataset> envs,
                                              std::size_t n_bins = kDefaultCalibrationBins);

struct TraceTailRow {
    std::size_t iteration = 0;
    double train_j = 0.0;  // mean J-penalty over training envs at that iteration
    ClassificationMetrics test;
};

/// Rows for the last k logged iterations, oldest first, pairing the mean
/// training J-penalty with the test metrics of the model checkpointed at
/// that iteration. Throws std::invalid_argument if k is 0 or exceeds the
/// trace length, and std::runtime_error if a checkpoint is missing.
std::vector<TraceTailRow> trace_tail(const TrainReport& report, std::size_t k, std::span<const EnvDataset> eval_envs,
                                     std::size_t n_bins = kDefaultCalibrationBins);

}  // namespace irmx
