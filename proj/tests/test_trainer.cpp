#include "doctest.h"

#include <cmath>

#include "helpers.hpp"
#include "irmx/oracles.hpp"
#include "irmx/trainer.hpp"

using namespace irmx;

namespace {

ObjectiveConfig gd(std::size_t iterations, double lr = 1e-3) {
    ObjectiveConfig c;
    c.iterations = iterations;
    c.learning_rate = lr;
    return c;
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("config validation") {
    ObjectiveConfig c = gd(0);
    CHECK_THROWS_AS(c.validate(2), std::invalid_argument);
    c = gd(10, 0.0);
    CHECK_THROWS_AS(c.validate(2), std::invalid_argument);
    c = gd(10);
    c.penalty_anneal_iters = 10;
    CHECK_THROWS_AS(c.validate(2), std::invalid_argument);
    c = gd(10);
    c.log_stride = 3;
    c.checkpoint_tail = 4;
    CHECK_THROWS_AS(c.validate(2), std::invalid_argument);
}

TEST_CASE("one GD iteration takes exactly one step of lr * grad") {
    const auto envs = testutil::sem_envs({0.5, 1.0}, 50, 2, 1);
    Rng rng(1, 5);
    const LinearModel start = testutil::random_linear(rng, 4);
    ObjectiveConfig c = gd(1, 0.01);
    c.penalty_kind = PenaltyKind::Cv;
    c.lambda = 0.5;
    c.extrapolation.gamma = 2.0;
    const auto g = objective(start, envs, c).grad;
    const TrainReport r = train_from(envs, c, start);
    const auto& w = std::get<LinearModel>(r.model).w;
    for (std::size_t k = 0; k < w.size(); ++k) CHECK(w[k] == start.w[k] - 0.01 * g[k]);
    REQUIRE(r.trace.size() == 1);
    CHECK(r.trace[0].iteration == 1);
}

TEST_CASE("ERM converges to the least-squares oracle") {
    const auto envs = testutil::sem_envs({0.2, 2.0}, 1000, 5, 2);
    ObjectiveConfig c = gd(20000);
    c.log_stride = 20000;
    const TrainReport r = train_from(envs, c, LinearModel::zeros(10));
    const LinearModel ols = least_squares_fit(envs);
    const auto& w = std::get<LinearModel>(r.model).w;
    for (std::size_t j = 0; j < 10; ++j) CHECK(std::abs(w[j] - ols.w[j]) < 1e-3);
}

TEST_CASE("ERM objective is non-increasing under GD") {
    const auto envs = testutil::sem_envs({0.2, 2.0}, 300, 5, 3);
    const TrainReport r = train_from(envs, gd(2000), LinearModel::zeros(10));
    REQUIRE(r.trace.size() == 2000);
    for (std::size_t t = 1; t < r.trace.size(); ++t) REQUIRE(r.trace[t].objective <= r.trace[t - 1].objective);
}

TEST_CASE("trace length follows the logging stride") {
    const auto envs = testutil::sem_envs({0.2, 2.0}, 40, 2, 4);
    ObjectiveConfig c = gd(100);
    c.log_stride = 7;
    c.checkpoint_tail = 5;
    const TrainReport r = train_from(envs, c, LinearModel::zeros(4));
    CHECK(r.trace.size() == 14);
    CHECK(r.trace.back().iteration == 98);
    REQUIRE(r.checkpoints.size() == 5);
    CHECK(r.checkpoints.front().iteration == 70);
    CHECK(r.trace[0].risks.size() == 2);
    CHECK(r.trace[0].j_penalties.size() == 2);
}

TEST_CASE("anneal keeps lambda at zero for the first updates") {
    const auto envs = testutil::sem_envs({0.2, 2.0}, 60, 2, 5);
    ObjectiveConfig erm = gd(30, 1e-3), pen = gd(30, 1e-3);
    pen.penalty_kind = PenaltyKind::IrmV1;
    pen.lambda = 1.0;
    pen.penalty_anneal_iters = 20;
    Rng rng(5, 1);
    const LinearModel start = testutil::random_linear(rng, 4, 0.1);
    const TrainReport a = train_from(envs, erm, start), b = train_from(envs, pen, start);
    CHECK(a.trace[19].objective == b.trace[19].objective);
    CHECK(a.trace[20].objective != b.trace[20].objective);
}

TEST_CASE("a huge penalty weight drives the J-penalties to zero") {
    const auto envs = testutil::sem_envs({0.2, 2.0}, 500, 5, 6);
    ObjectiveConfig c = gd(2000);
    c.optimizer = OptimizerKind::Adam;
    c.penalty_kind = PenaltyKind::Cv;
    c.lambda = 1e8;
    c.extrapolation.gamma = 10.0;
    c.log_stride = 2000;
    Rng rng(6, 0);
    const TrainReport r = train(envs, c, rng);
    for (double j : r.trace.back().j_penalties) CHECK(j < 1e-4);
}

TEST_CASE("divergence raises a training error with the update index") {
    const auto envs = testutil::sem_envs({0.2, 2.0}, 100, 5, 7);
    try {
        (void)train_from(envs, gd(1000, 10.0), LinearModel::zeros(10));
        FAIL("expected divergence");
    } catch (const TrainingError& err) {
        CHECK(err.iteration >= 1);
        CHECK(err.iteration <= 1000);
    }
}

TEST_CASE("training is deterministic for a fixed seed, MLP included") {
    const auto envs = testutil::cls_envs({0.1, 0.2}, 200, 8);
    ObjectiveConfig c;
    c.loss = LossKind::BinaryCrossEntropyWithLogit;
    c.optimizer = OptimizerKind::Adam;
    c.penalty_kind = PenaltyKind::Cmm;
    c.lambda = 10.0;
    c.extrapolation.alpha_min = -0.5;
    c.iterations = 50;
    c.model.kind = ModelSpec::Kind::Mlp;
    c.model.hidden = {4};
    Rng a(8, 2), b(8, 2);
    const TrainReport r1 = train(envs, c, a), r2 = train(envs, c, b);
    CHECK(r1.model == r2.model);
    CHECK(r1.trace.back().objective == r2.trace.back().objective);
    CHECK(r1.seed == 8);
    CHECK(r1.stream == 2);
}

TEST_CASE("linear models start from the configured constant") {
    ModelSpec spec;
    spec.linear_init = 1.0;
    Rng rng(0, 0);
    const auto m = std::get<LinearModel>(spec.initialize(4, rng));
    CHECK(m.w == std::vector<double>(4, 1.0));
    CHECK(std::get<LinearModel>(ModelSpec{}.initialize(3, rng)).w == std::vector<double>(3, 0.0));
}

TEST_CASE("grid expansion sizes for the SEM ranges") {
    const std::vector<double> lambdas{1.0, 10.0}, alphas{-1.0, -5.0, -10.0}, gammas{1.0, 10.0, 100.0};
    ObjectiveConfig base;
    base.penalty_kind = PenaltyKind::IrmV1;
    CHECK(expand_grid(base, lambdas, alphas, gammas).size() == 2);
    base.penalty_kind = PenaltyKind::Cmm;
    CHECK(expand_grid(base, lambdas, alphas, gammas).size() == 6);
    base.penalty_kind = PenaltyKind::Cv;
    const auto v = expand_grid(base, lambdas, alphas, gammas);
    CHECK(v.size() == 6);
    CHECK(v[4].lambda == 10.0);
    CHECK(v[4].extrapolation.gamma == 10.0);
    base.penalty_kind = PenaltyKind::None;
    CHECK(expand_grid(base, lambdas, alphas, gammas).size() == 1);
}

TEST_CASE("grid search: single config, divergence disqualifies, empty grid rejected") {
    const auto envs = testutil::sem_envs({0.2, 2.0}, 100, 2, 9);
    const std::vector<ObjectiveConfig> one{gd(50)};
    const GridSearchResult r1 = grid_search(envs, one, 0.2, Rng(9, 0));
    CHECK(r1.best == one[0]);
    CHECK(r1.best_index == 0);

    const std::vector<ObjectiveConfig> two{gd(500, 10.0), gd(50)};
    const GridSearchResult r2 = grid_search(envs, two, 0.2, Rng(9, 0));
    CHECK(r2.entries[0].diverged);
    CHECK(std::isnan(r2.entries[0].validation_risk));
    CHECK(r2.best_index == 1);

    CHECK_THROWS_AS(grid_search(envs, std::vector<ObjectiveConfig>{}, 0.2, Rng(9, 0)), std::invalid_argument);
    const std::vector<ObjectiveConfig> bad{gd(500, 10.0)};
    CHECK_THROWS_AS(grid_search(envs, bad, 0.2, Rng(9, 0)), TrainingError);
}

TEST_CASE("grid search picks the lowest validation risk and is reproducible") {
    const auto envs = testutil::sem_envs({0.2, 1.0}, 200, 2, 10);
    ObjectiveConfig base = gd(300);
    base.penalty_kind = PenaltyKind::IrmV1;
    const std::vector<double> lambdas{0.0, 1.0, 100.0};
    const auto grid = expand_grid(base, lambdas, {}, {});
    const GridSearchResult a = grid_search(envs, grid, 0.2, Rng(10, 0));
    const GridSearchResult b = grid_search(envs, grid, 0.2, Rng(10, 0));
    std::size_t best = 0;
    for (std::size_t i = 0; i < a.entries.size(); ++i)
        if (!a.entries[i].diverged && a.entries[i].validation_risk < a.entries[best].validation_risk) best = i;
    CHECK(a.best_index == best);
    CHECK(a.report.model == b.report.model);
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        CHECK(a.entries[i].diverged == b.entries[i].diverged);
        if (!a.entries[i].diverged) CHECK(a.entries[i].validation_risk == b.entries[i].validation_risk);
    }
}

}
