#include "irmx/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace irmx {

namespace {

void check_halves(const LinearModel& model, std::size_t d) {
    if (d == 0 || model.w.size() != 2 * d)
        throw std::invalid_argument("invariance error: model dimension " + std::to_string(model.w.size()) +
                                    " is not 2d for d=" + std::to_string(d));
}

}  // namespace

double causal_error(const LinearModel& model, std::size_t d) {
    check_halves(model, d);
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += (model.w[j] - 1.0) * (model.w[j] - 1.0);
    return s / static_cast<double>(d);
}

double noncausal_error(const LinearModel& model, std::size_t d) {
    check_halves(model, d);
    double s = 0.0;
    for (std::size_t j = d; j < 2 * d; ++j) s += model.w[j] * model.w[j];
    return s / static_cast<double>(d);
}

double accuracy(std::span<const double> logits, std::span<const double> labels) {
    if (logits.size() != labels.size()) throw std::invalid_argument("accuracy: length mismatch");
    if (logits.empty()) throw std::invalid_argument("accuracy: no samples");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < logits.size(); ++i) hits += (logits[i] > 0.0) == (labels[i] == 1.0) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(logits.size());
}

void CalibrationInput::validate() const {
    if (confidences.size() != correct.size()) throw std::invalid_argument("calibration: length mismatch");
    if (confidences.empty()) throw std::invalid_argument("calibration: no samples");
    for (double c : confidences)
        if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("calibration: confidence outside [0, 1]");
    for (int k : correct)
        if (k != 0 && k != 1) throw std::invalid_argument("calibration: correctness must be 0 or 1");
}

CalibrationInput calibration_from_logits(std::span<const double> logits, std::span<const double> labels) {
    if (logits.size() != labels.size()) throw std::invalid_argument("calibration: length mismatch");
    CalibrationInput in;
    in.confidences.reserve(logits.size());
    in.correct.reserve(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double z = logits[i];
        // max(s, 1 - s) = sigmoid(|z|)
        in.confidences.push_back(1.0 / (1.0 + std::exp(-std::abs(z))));
        in.correct.push_back((z > 0.0) == (labels[i] == 1.0) ? 1 : 0);
    }
    return in;
}

double ece(const CalibrationInput& input, std::size_t n_bins) {
    input.validate();
    if (n_bins == 0) throw std::invalid_argument("ece: n_bins must be >= 1");
    std::vector<double> conf_sum(n_bins, 0.0), hit_sum(n_bins, 0.0);
    std::vector<std::size_t> count(n_bins, 0);
    const double B = static_cast<double>(n_bins);
    for (std::size_t i = 0; i < input.confidences.size(); ++i) {
        const double c = input.confidences[i];
        const double raw = std::ceil(c * B) - 1.0;
        const auto b = static_cast<std::size_t>(std::clamp(raw, 0.0, B - 1.0));
        conf_sum[b] += c;
        hit_sum[b] += input.correct[i];
        ++count[b];
    }
    const double n = static_cast<double>(input.confidences.size());
    double total = 0.0;
    for (std::size_t b = 0; b < n_bins; ++b) {
        if (count[b] == 0) continue;
        const double nb = static_cast<double>(count[b]);
        total += (nb / n) * std::abs(hit_sum[b] / nb - conf_sum[b] / nb);
    }
    return total;
}

double ace(const CalibrationInput& input, std::size_t n_bins) {
    input.validate();
    const std::size_t n = input.confidences.size();
    if (n_bins == 0) throw std::invalid_argument("ace: n_bins must be >= 1");
    if (n_bins > n) throw std::invalid_argument("ace: more bins than samples");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (input.confidences[a] != input.confidences[b]) return input.confidences[a] < input.confidences[b];
        return input.correct[a] < input.correct[b];
    });

    const std::size_t base = n / n_bins, extra = n % n_bins;
    std::size_t pos = 0;
    double total = 0.0;
    for (std::size_t b = 0; b < n_bins; ++b) {
        const std::size_t size = base + (b < extra ? 1 : 0);
        double cs = 0.0, hs = 0.0;
        for (std::size_t k = pos; k < pos + size; ++k) {
            cs += input.confidences[order[k]];
            hs += input.correct[order[k]];
        }
        pos += size;
        total += std::abs(hs / static_cast<double>(size) - cs / static_cast<double>(size));
    }
    return total / static_cast<double>(n_bins);
}

ClassificationMetrics evaluate_classification(const Model& model, std::span<const EnvDataset> envs,
                                              std::size_t n_bins) {
    if (envs.empty()) throw std::invalid_argument("evaluate_classification: no environments");
    std::vector<double> logits, labels;
    for (const auto& env : envs) {
        const auto out = forward(model, env.X);
        logits.insert(logits.end(), out.begin(), out.end());
        labels.insert(labels.end(), env.y.begin(), env.y.end());
    }
    const CalibrationInput cal = calibration_from_logits(logits, labels);
    return {accuracy(logits, labels), ece(cal, n_bins), ace(cal, std::min(n_bins, logits.size()))};
}

std::vector<TraceTailRow> trace_tail(const TrainReport& report, std::size_t k, std::span<const EnvDataset> eval_envs,
                                     std::size_t n_bins) {
    if (k == 0 || k > report.trace.size())
        throw std::invalid_argument("trace_tail: k must lie in [1, trace length]");
    std::vector<TraceTailRow> rows;
    rows.reserve(k);
    for (std::size_t r = report.trace.size() - k; r < report.trace.size(); ++r) {
        const TraceRecord& rec = report.trace[r];
        const auto it = std::find_if(report.checkpoints.begin(), report.checkpoints.end(),
                                     [&](const Checkpoint& c) { return c.iteration == rec.iteration; });
        if (it == report.checkpoints.end())
            throw std::runtime_error("trace_tail: no checkpoint for iteration " + std::to_string(rec.iteration));
        TraceTailRow row;
        row.iteration = rec.iteration;
        row.train_j = std::accumulate(rec.j_penalties.begin(), rec.j_penalties.end(), 0.0) /
                      static_cast<double>(rec.j_penalties.size());
        row.test = evaluate_classification(it->model, eval_envs, n_bins);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace irmx
