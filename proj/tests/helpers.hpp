#pragma once

#include <cmath>
#include <vector>

#include "irmx/data.hpp"
#include "irmx/models.hpp"
#include "irmx/rng.hpp"

namespace testutil {

inline std::vector<irmx::EnvDataset> sem_envs(std::initializer_list<double> es, std::size_t n, std::size_t d,
                                              std::uint64_t seed) {
    std::vector<irmx::EnvDataset> out;
    std::uint64_t stream = 0;
    for (double e : es) {
        irmx::Rng rng(seed, stream++);
        out.push_back(irmx::generate_sem_env(irmx::EnvSpec::sem(e, n, d), rng));
    }
    return out;
}

inline std::vector<irmx::EnvDataset> cls_envs(std::initializer_list<double> ps, std::size_t n, std::uint64_t seed) {
    std::vector<irmx::EnvDataset> out;
    std::uint64_t stream = 0;
    for (double p : ps) {
        irmx::Rng rng(seed, stream++);
        out.push_back(irmx::generate_cls_env(irmx::EnvSpec::cls(p, n), rng));
    }
    return out;
}

inline irmx::LinearModel random_linear(irmx::Rng& rng, std::size_t dim, double scale = 1.0, bool bias = false) {
    irmx::LinearModel m = irmx::LinearModel::zeros(dim, bias);
    for (double& w : m.w) w = irmx::sample_normal(rng, 0.0, scale);
    if (bias) m.bias = irmx::sample_normal(rng, 0.0, scale);
    return m;
}

inline irmx::MlpModel random_mlp(irmx::Rng& rng, std::vector<std::size_t> widths) {
    irmx::MlpModel m = irmx::MlpModel::init(widths, rng);
    for (auto& layer : m.layers)
        for (double& b : layer.bias) b = irmx::sample_normal(rng, 0.0, 0.3);
    return m;
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline irmx::Matrix matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values) {
    irmx::Matrix m(rows, cols);
    std::size_t k = 0;
    for (double v : values) m.flat()[k++] = v;
    return m;
}

}  // namespace testutil
