#include "irmx/data.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace irmx {

EnvSpec EnvSpec::sem(double e, std::size_t n, std::size_t d) {
    EnvSpec s;
    s.kind = EnvKind::SemRegression;
    s.noise_scale = e;
    s.n = n;
    s.d = d;
    return s;
}

EnvSpec EnvSpec::cls(double p_flip, std::size_t n, double label_noise) {
    EnvSpec s;
    s.kind = EnvKind::SpuriousClassification;
    s.p_flip = p_flip;
    s.label_noise = label_noise;
    s.n = n;
    s.d = ClsConstants::kBlockDim;
    return s;
}

std::size_t EnvSpec::input_dim() const {
    return kind == EnvKind::SemRegression ? 2 * d : 2 * ClsConstants::kBlockDim;
}

void EnvSpec::validate() const {
    if (n < 1) throw std::invalid_argument("EnvSpec: n must be >= 1");
    if (kind == EnvKind::SemRegression) {
        // e = 0 is accepted as the degenerate limit e -> 0+.
        if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale))
            throw std::invalid_argument("EnvSpec: SEM noise scale must be finite and >= 0");
        if (d < 1) throw std::invalid_argument("EnvSpec: d must be >= 1");
    } else {
        if (!(p_flip >= 0.0 && p_flip <= 1.0))
            throw std::invalid_argument("EnvSpec: p_flip must lie in [0, 1]");
        if (!(label_noise >= 0.0 && label_noise <= 1.0))
            throw std::invalid_argument("EnvSpec: label_noise must lie in [0, 1]");
    }
}

EnvDataset EnvDataset::subset(std::span<const std::size_t> indices) const {
    EnvDataset out;
    out.X = X.select_rows(indices);
    out.y.reserve(indices.size());
    for (auto i : indices) out.y.push_back(y.at(i));
    out.spec = spec;
    out.spec.n = indices.size();
    return out;
}

EnvDataset generate_sem_env(const EnvSpec& spec, Rng& rng) {
    if (spec.kind != EnvKind::SemRegression)
        throw std::invalid_argument("generate_sem_env: spec is not a SEM spec");
    spec.validate();
    const std::size_t n = spec.n, d = spec.d;
    const double e = spec.noise_scale;

    EnvDataset env{Matrix(n, 2 * d), std::vector<double>(n, 0.0), spec};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) env.X(i, j) = sample_normal(rng, 0.0, e);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += env.X(i, j);
        env.y[i] = s + sample_normal(rng, 0.0, 1.0);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) env.X(i, d + j) = env.y[i] + sample_normal(rng, 0.0, e);
    return env;
}

EnvDataset generate_cls_env(const EnvSpec& spec, Rng& rng) {
    if (spec.kind != EnvKind::SpuriousClassification)
        throw std::invalid_argument("generate_cls_env: spec is not a classification spec");
    spec.validate();
    constexpr std::size_t k = ClsConstants::kBlockDim;
    const double unit = 1.0 / std::sqrt(2.0);
    const double mu_inv = ClsConstants::kInvariantScale * unit;
    const double mu_spu = ClsConstants::kSpuriousScale * unit;
    const double sigma = ClsConstants::kNoiseStd;

    EnvDataset env{Matrix(spec.n, 2 * k), std::vector<double>(spec.n, 0.0), spec};
    for (std::size_t i = 0; i < spec.n; ++i) {
        const int z = rng.bernoulli(0.5) ? 1 : 0;
        const int y = rng.bernoulli(spec.label_noise) ? 1 - z : z;
        for (std::size_t j = 0; j < k; ++j) env.X(i, j) = (2 * z - 1) * mu_inv + sample_normal(rng, 0.0, sigma);
        const int c = rng.bernoulli(spec.p_flip) ? 1 - y : y;
        for (std::size_t j = 0; j < k; ++j)
            env.X(i, k + j) = (2 * c - 1) * mu_spu + sample_normal(rng, 0.0, sigma);
        env.y[i] = y;
    }
    return env;
}

std::vector<int> spurious_sign(const EnvDataset& env) {
    if (env.spec.kind != EnvKind::SpuriousClassification)
        throw std::invalid_argument("spurious_sign: not a classification dataset");
    constexpr std::size_t k = ClsConstants::kBlockDim;
    std::vector<int> out(env.n());
    for (std::size_t i = 0; i < env.n(); ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < k; ++j) dot += env.X(i, k + j);
        out[i] = dot > 0.0 ? 1 : (dot < 0.0 ? -1 : 0);
    }
    return out;
}

EnvDataset generate_env(const EnvSpec& spec, Rng& rng) {
    return spec.kind == EnvKind::SemRegression ? generate_sem_env(spec, rng) : generate_cls_env(spec, rng);
}

std::pair<EnvDataset, EnvDataset> split_validation(const EnvDataset& env, double fraction, Rng& rng) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::invalid_argument("split_validation: fraction must lie in (0, 1)");
    const std::size_t n = env.n();
    const auto n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    if (n_val == 0 || n_val >= n)
        throw std::invalid_argument("split_validation: split leaves an empty part (n=" + std::to_string(n) + ")");

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = n - 1; i > 0; --i) std::swap(idx[i], idx[rng.below(i + 1)]);

    const std::span<const std::size_t> all(idx);
    return {env.subset(all.first(n - n_val)), env.subset(all.last(n_val))};
}

}  // namespace irmx
