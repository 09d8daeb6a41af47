#include "doctest.h"

#include "helpers.hpp"
#include "irmx/oracles.hpp"
#include "irmx/penalties.hpp"

using namespace irmx;

TEST_SUITE("oracles") {

TEST_CASE("finite differences of simple functions") {
    const std::vector<double> three{3.0};
    const auto g = finite_diff_grad([](std::span<const double> w) { return w[0] * w[0]; }, three, 1e-5);
    CHECK(std::abs(g[0] - 6.0) < 1e-6);
    const std::vector<double> theta{1.0, -2.0, 0.5};
    for (double v : finite_diff_grad([](std::span<const double>) { return 4.2; }, theta)) CHECK(v == 0.0);
}

TEST_CASE("finite differences reject bad input") {
    const std::vector<double> x{1.0};
    CHECK_THROWS_AS(finite_diff_grad([](std::span<const double>) { return 0.0; }, x, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(finite_diff_grad([](std::span<const double>) { return NAN; }, x), OracleError);
}

TEST_CASE("ERM objective gradient against finite differences") {
    const auto envs = testutil::sem_envs({0.2, 2.0}, 200, 3, 3);
    Rng rng(3, 9);
    for (int t = 0; t < 10; ++t) {
        const Model m = testutil::random_linear(rng, 6);
        const ObjectiveTerms terms = objective(m, envs, LossKind::SquaredError, {});
        const auto f = [&](std::span<const double> th) {
            return objective_value(with_parameters(m, th), envs, LossKind::SquaredError, {}).value;
        };
        CHECK(max_relative_error(terms.grad, finite_diff_grad(f, parameters(m))) < 1e-5);
    }
}

TEST_CASE("relative error uses max(1, |analytic|)") {
    const std::vector<double> a{0.0, 100.0}, b{1e-3, 101.0};
    CHECK(max_relative_error(a, b) == doctest::Approx(0.01));
}

TEST_CASE("LP vertex enumeration by hand") {
    const std::vector<double> J{1.0, 3.0};
    CHECK(lp_vertex_max(J, 0.5).value == 2.0);
    const auto r = lp_vertex_max(J, -1.0);
    CHECK(r.value == 5.0);
    CHECK(r.vertex == std::vector<double>{-1.0, 2.0});
    const std::vector<double> flat{2.5, 2.5, 2.5};
    for (double a : {1.0 / 3.0, 0.0, -4.0}) CHECK(lp_vertex_max(flat, a).value == doctest::Approx(2.5).epsilon(1e-14));
    CHECK_THROWS_AS(lp_vertex_max(J, 0.51), OracleError);
}

TEST_CASE("least squares recovers a noiseless solution") {
    auto envs = testutil::sem_envs({0.5, 1.5}, 80, 2, 4);
    const std::vector<double> w_star{0.3, -1.2, 2.0, 0.7};
    LinearModel truth = LinearModel::zeros(4);
    truth.w = w_star;
    for (auto& env : envs) env.y = forward(truth, env.X);
    const LinearModel fit = least_squares_fit(envs);
    for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(fit.w[j] - w_star[j]) < 1e-8);
}

TEST_CASE("least squares on a single column") {
    EnvDataset env;
    env.X = testutil::matrix(3, 1, {1.0, 2.0, 3.0});
    env.y = {2.0, 4.0, 6.0};
    CHECK(least_squares_fit(std::vector<EnvDataset>{env}).w[0] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("least squares detects rank deficiency") {
    EnvDataset env;
    env.X = testutil::matrix(3, 2, {1.0, 2.0, 2.0, 4.0, 3.0, 6.0});
    env.y = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS(least_squares_fit(std::vector<EnvDataset>{env}), OracleError);
}

}
