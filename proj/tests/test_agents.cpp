#include <doctest.h>

#include <cmath>

#include "mfd/agents.hpp"

using namespace mfd;

namespace {

DriftDiffusionModel frozen_model() {
    DriftDiffusionModel m;
    m.drift = [](const Eigen::Vector2d&, double) { return Eigen::Vector2d::Zero().eval(); };
    m.noise = [](const Eigen::Vector2d&, double) { return Eigen::Matrix2d::Zero().eval(); };
    m.diffusion = [](const Eigen::Vector2d&, double) {
        return Eigen::Matrix2d::Identity().eval();
    };
    m.autonomous = true;
    return m;
}

}  // namespace

TEST_CASE("uniform initialization is deterministic and inside the domain") {
    const GridSpec grid = GridSpec::make(-1.0, 2.0, 0.0, 1.0, 5, 5);
    const AgentEnsemble one = init_uniform(1, grid, 42);
    CHECK(one.size() == 1);
    CHECK(one.positions(0, 0) > grid.x_min);
    CHECK(one.positions(0, 0) < grid.x_max);
    CHECK(one.positions(0, 1) > grid.y_min);
    CHECK(one.positions(0, 1) < grid.y_max);

    const AgentEnsemble again = init_uniform(1, grid, 42);
    CHECK(one.positions == again.positions);
    const AgentEnsemble other = init_uniform(1, grid, 43);
    CHECK(one.positions != other.positions);

    CHECK_THROWS_AS(init_uniform(0, grid, 1), ConfigError);
}

TEST_CASE("uniform sample mean obeys the CLT bound") {
    const GridSpec grid = GridSpec::unit_square(4, 4);
    const int n = 100000;
    const AgentEnsemble ens = init_uniform(n, grid, 7);
    const double bound = 3.0 * (1.0 / std::sqrt(12.0)) / std::sqrt(double(n));
    CHECK(std::abs(ens.positions.col(0).mean() - 0.5) < bound);
    CHECK(std::abs(ens.positions.col(1).mean() - 0.5) < bound);
}

TEST_CASE("step with zero drift and zero noise leaves the ensemble unchanged") {
    const GridSpec grid = GridSpec::unit_square(4, 4);
    AgentEnsemble ens = init_uniform(25, grid, 3);
    const auto before = ens.positions;
    step_ensemble(ens, frozen_model(), 0.0, 0.1, grid);
    CHECK(ens.positions == before);
    CHECK(ens.step_count == 1);
}

TEST_CASE("deterministic Euler shift under constant drift") {
    const GridSpec grid = GridSpec::unit_square(4, 4);
    AgentEnsemble ens = init_uniform(1, grid, 9);
    ens.positions(0, 0) = 0.5;
    ens.positions(0, 1) = 0.5;
    DriftDiffusionModel m = frozen_model();
    m.drift = [](const Eigen::Vector2d&, double) { return Eigen::Vector2d(0.1, 0.0); };
    step_ensemble(ens, m, 0.0, 0.1, grid);
    CHECK(ens.positions(0, 0) == doctest::Approx(0.51).epsilon(1e-14));
    CHECK(ens.positions(0, 1) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("Brownian increments have variance D^2 dt") {
    const GridSpec grid = GridSpec::make(-50.0, 50.0, -50.0, 50.0, 4, 4);
    const double d = 0.2;
    const double dt = 0.1;
    DriftDiffusionModel m = frozen_model();
    m.noise = [d](const Eigen::Vector2d&, double) {
        return Eigen::Matrix2d(d * Eigen::Matrix2d::Identity());
    };

    AgentEnsemble ens = init_uniform(10000, grid, 11);
    // Recenter away from the boundary so no reflections occur.
    ens.positions.setZero();
    double sum_sq = 0.0;
    long count = 0;
    auto prev = ens.positions;
    for (int k = 0; k < 10; ++k) {
        step_ensemble(ens, m, k * dt, dt, grid);
        const auto incr = ens.positions - prev;
        sum_sq += incr.array().square().sum();
        count += 2 * ens.size();
        prev = ens.positions;
    }
    const double sample_var = sum_sq / double(count);
    CHECK(sample_var == doctest::Approx(d * d * dt).epsilon(0.05));
}

TEST_CASE("reflection keeps agents inside the closed domain") {
    const GridSpec grid = GridSpec::unit_square(4, 4);
    const double d = 0.8;  // large moves relative to the unit square
    DriftDiffusionModel m = frozen_model();
    m.noise = [d](const Eigen::Vector2d&, double) {
        return Eigen::Matrix2d(d * Eigen::Matrix2d::Identity());
    };
    AgentEnsemble ens = init_uniform(200, grid, 5);
    for (int k = 0; k < 50; ++k) {
        step_ensemble(ens, m, 0.0, 0.1, grid);
        CHECK(ens.positions.col(0).minCoeff() >= grid.x_min);
        CHECK(ens.positions.col(0).maxCoeff() <= grid.x_max);
        CHECK(ens.positions.col(1).minCoeff() >= grid.y_min);
        CHECK(ens.positions.col(1).maxCoeff() <= grid.y_max);
    }
}

TEST_CASE("a step too large for reflection raises a numerical error") {
    const GridSpec grid = GridSpec::unit_square(4, 4);
    AgentEnsemble ens = init_uniform(1, grid, 2);
    DriftDiffusionModel m = frozen_model();
    m.drift = [](const Eigen::Vector2d&, double) { return Eigen::Vector2d(1e5, 0.0); };
    CHECK_THROWS_AS(step_ensemble(ens, m, 0.0, 1.0, grid), NumericalError);
}

TEST_CASE("trajectories are identical for any worker count") {
    const GridSpec grid = GridSpec::unit_square(4, 4);
    const MixtureSpec spec = spinning_mixture_spec();
    const DriftDiffusionModel model = scenario_model(spec, 0.03);

    AgentEnsemble serial = init_uniform(64, grid, 123);
    AgentEnsemble threaded = init_uniform(64, grid, 123);
    for (int k = 0; k < 20; ++k) {
        step_ensemble(serial, model, k * 0.1, 0.1, grid, 1);
        step_ensemble(threaded, model, k * 0.1, 0.1, grid, 3);
    }
    CHECK(serial.positions == threaded.positions);
}
