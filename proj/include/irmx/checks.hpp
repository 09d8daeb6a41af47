#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "json.hpp"

namespace irmx {

/// Outcome of one randomized property. `worst` is the largest observed
/// violation measure (property-specific, see each check); `counterexample`
/// is null when the property held.
struct PropertyResult {
    std::string name;
    bool passed = true;
    std::size_t cases = 0;
    double worst = 0.0;
    std::string detail;
    nlohmann::json counterexample;
};

/// irmv1_penalty <= j_penalty + 1e-12 on random (model, env, loss) triples.
/// worst = max(irmv1 - j). `flip` reverses the inequality (harness self-test).
PropertyResult check_jensen(std::size_t trials, std::uint64_t seed, bool flip = false);

/// For SquaredError and linear models on SEM envs {0.2, 2}:
/// irmv1_e <= 2 L delta + 1e-9 with L = 2 max_e mean(Phi^2) and delta = sum_e R_e.
/// worst = max(irmv1_e - 2 L delta).
PropertyResult check_theorem_bound(std::size_t trials, std::uint64_t seed);

/// |c_mm(J, alpha_min) - lp_vertex_max(J, alpha_min)| <= 1e-12 for |E| in 2..6.
PropertyResult check_lp_equivalence(std::size_t trials, std::uint64_t seed);

/// objective() gradients against central differences for every penalty kind
/// on linear and MLP models (trials per kind and model), relative 1e-5.
PropertyResult check_gradients(std::size_t trials_per_kind, std::uint64_t seed);

/// ERM with 20000 GD steps at lr 1e-3 on pooled SEM envs {0.2, 2}
/// (n = 1000, d = 5) against the least-squares oracle, 1e-3 per coordinate.
PropertyResult check_ols_convergence(std::uint64_t seed);

}  // namespace irmx
