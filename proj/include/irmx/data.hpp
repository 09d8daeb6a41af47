#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "irmx/matrix.hpp"
#include "irmx/rng.hpp"

namespace irmx {

enum class EnvKind { SemRegression, SpuriousClassification };

/// Parameters of one environment.
///
/// SemRegression uses `noise_scale` (the environment value e) and `d`.
/// SpuriousClassification uses `p_flip` and `label_noise`; its inputs are
/// always 4-dimensional: [x_inv (2) | x_spu (2)].
struct EnvSpec {
    EnvKind kind = EnvKind::SemRegression;
    double noise_scale = 1.0;
    double p_flip = 0.0;
    double label_noise = 0.25;
    std::size_t n = 1000;
    std::size_t d = 5;

    static EnvSpec sem(double e, std::size_t n, std::size_t d);
    static EnvSpec cls(double p_flip, std::size_t n, double label_noise = 0.25);

    /// Input width D of the generated design matrix.
    std::size_t input_dim() const;

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;

    friend bool operator==(const EnvSpec&, const EnvSpec&) = default;
};

/// Fixed constants of the spurious-correlation classification analogue.
struct ClsConstants {
    static constexpr double kInvariantScale = 1.0;
    static constexpr double kSpuriousScale = 2.0;
    static constexpr double kNoiseStd = 1.0;
    static constexpr std::size_t kBlockDim = 2;
};

/// One environment's empirical sample. Rows of X align with entries of y.
struct EnvDataset {
    Matrix X;
    std::vector<double> y;
    EnvSpec spec;

    std::size_t n() const { return y.size(); }
    std::size_t dim() const { return X.cols(); }

    /// Rows `indices` as a new dataset; spec.n is updated to the new count.
    EnvDataset subset(std::span<const std::size_t> indices) const;

    friend bool operator==(const EnvDataset&, const EnvDataset&) = default;
};

/// Samples the linear SEM
///   x_inv ~ N(0, e^2 I_d),  y = 1^T x_inv + u, u ~ N(0,1),  x_spu = y 1 + v, v ~ N(0, e^2 I_d).
/// Draw order: all n*d x_inv entries (row-major), then the n values of u,
/// then all n*d entries of v (row-major). Columns are [x_inv | x_spu].
EnvDataset generate_sem_env(const EnvSpec& spec, Rng& rng);

/// Samples the spurious-correlation classification analogue. Per row, in order:
///   z ~ Bernoulli(1/2); y = z xor Bernoulli(label_noise);
///   x_inv = (2z-1) mu_inv + N(0, sigma^2 I_2)   (two normals);
///   c = y xor Bernoulli(p_flip);
///   x_spu = (2c-1) mu_spu + N(0, sigma^2 I_2)   (two normals).
/// mu_inv = (1,1)/sqrt(2), mu_spu = 2 (1,1)/sqrt(2), sigma = 1.
EnvDataset generate_cls_env(const EnvSpec& spec, Rng& rng);

/// The color bit c is not stored in the dataset; this recovers it for
/// noise-free data and approximates it otherwise: sign of x_spu . mu_spu.
std::vector<int> spurious_sign(const EnvDataset& env);

/// Dispatches on spec.kind.
EnvDataset generate_env(const EnvSpec& spec, Rng& rng);

/// Deterministic split of `env` into (train, validation). A seeded
/// Fisher-Yates shuffle of the row indices is cut so that the last
/// round(fraction * n) shuffled rows form the validation part; both parts keep
/// the shuffled order. Requires 0 < fraction < 1 and both parts nonempty.
std::pair<EnvDataset, EnvDataset> split_validation(const EnvDataset& env, double fraction, Rng& rng);

}  // namespace irmx
