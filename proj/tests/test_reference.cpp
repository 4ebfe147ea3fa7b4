#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mfd/reference.hpp"

using namespace mfd;

namespace {

// Decay rate of the p0 = 1 + eps*cos(pi x) mode under pure x-diffusion with
// zero-flux walls, measured from the discrete run and compared with the
// separation-of-variables solution exp(-S11 pi^2 t).
double cosine_decay_rate(int nx, double s11, double t_end) {
    const GridSpec grid = GridSpec::unit_square(nx, 3);
    DriftDiffusionModel model;
    model.drift = [](const Eigen::Vector2d&, double) {
        return Eigen::Vector2d::Zero().eval();
    };
    model.diffusion = [s11](const Eigen::Vector2d&, double) {
        return Eigen::Matrix2d(Eigen::Vector2d(s11, s11).asDiagonal());
    };
    model.autonomous = true;

    const double eps = 0.01;
    ScalarField p0(grid);
    for (int iy = 0; iy < grid.ny; ++iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            p0.at(ix, iy) = 1.0 + eps * std::cos(std::numbers::pi * grid.cell_x(ix));
        }
    }

    const GeneratorMatrix gen =
        assemble_generator(grid, model.drift, model.diffusion, 0.0);
    const double dt = 0.5 * gen.max_stable_dt();
    const int steps = static_cast<int>(std::ceil(t_end / dt));

    auto amplitude = [&](const ScalarField& p) {
        // Project onto the cosine mode along one y-row.
        double acc = 0.0;
        for (int ix = 0; ix < grid.nx; ++ix) {
            acc += (p.at(ix, 1) - 1.0) * std::cos(std::numbers::pi * grid.cell_x(ix));
        }
        return acc * 2.0 * grid.dx;
    };

    ReferenceState state{p0, 0.0};
    const double a0 = amplitude(state.p);
    for (int k = 0; k < steps; ++k) state = reference_step(state, gen, dt);
    const double a1 = amplitude(state.p);
    return -std::log(a1 / a0) / (steps * dt);
}

}  // namespace

TEST_CASE("uniform density is stationary under pure diffusion") {
    const GridSpec grid = GridSpec::unit_square(12, 9);
    const DriftDiffusionModel model = pure_diffusion_model(0.05);
    const GeneratorMatrix gen =
        assemble_generator(grid, model.drift, model.diffusion, 0.0);
    ReferenceState state{uniform_density(grid), 0.0};
    for (int k = 0; k < 100; ++k) state = reference_step(state, gen, 0.05);
    CHECK((state.p.values.array() - 1.0).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("each step conserves mass to 1e-14") {
    const GridSpec grid = GridSpec::unit_square(20, 20);
    const DriftDiffusionModel model = scenario_model(spinning_mixture_spec(), 0.03);
    ReferenceState state{uniform_density(grid), 0.0};
    for (int k = 0; k < 50; ++k) {
        const GeneratorMatrix gen =
            assemble_generator(grid, model.drift, model.diffusion, state.t);
        const double before = mass(state.p);
        state = propagate_reference(state, gen, 0.1);
        CHECK(std::abs(mass(state.p) - before) <= 1e-14);
    }
}

TEST_CASE("substep count tracks the stability bound") {
    const GridSpec grid = GridSpec::unit_square(30, 30);
    const DriftDiffusionModel model = scenario_model(spinning_mixture_spec(), 0.03);
    const GeneratorMatrix gen =
        assemble_generator(grid, model.drift, model.diffusion, 0.0);
    const int n = stable_substeps(gen, 0.1);
    CHECK(n >= 2);
    CHECK(0.1 / n <= 0.9 * gen.max_stable_dt());
    CHECK(stable_substeps(gen, 0.5 * gen.max_stable_dt()) == 1);
}

TEST_CASE("violating the stability bound raises with the computed dt_max") {
    const GridSpec grid = GridSpec::unit_square(30, 30);
    const DriftDiffusionModel model = pure_diffusion_model(0.5);
    const GeneratorMatrix gen =
        assemble_generator(grid, model.drift, model.diffusion, 0.0);
    const ReferenceState state{uniform_density(grid), 0.0};
    CHECK_THROWS_AS(reference_step(state, gen, 1.1 * gen.max_stable_dt()),
                    NumericalError);
    CHECK_NOTHROW(reference_step(state, gen, 0.9 * gen.max_stable_dt()));
}

TEST_CASE("cosine mode decays at the analytic Neumann rate") {
    const double s11 = 0.05;
    const double rate = cosine_decay_rate(60, s11, 4.0);
    const double analytic = s11 * std::numbers::pi * std::numbers::pi;
    CHECK(rate == doctest::Approx(analytic).epsilon(0.01));
}

TEST_CASE("refinement improves the decay-rate error at first order or better") {
    const double s11 = 0.05;
    const double analytic = s11 * std::numbers::pi * std::numbers::pi;
    const double err_coarse = std::abs(cosine_decay_rate(30, s11, 2.0) - analytic);
    const double err_fine = std::abs(cosine_decay_rate(60, s11, 2.0) - analytic);
    CHECK(err_coarse / err_fine >= 2.0);
}

TEST_CASE("zero-length horizon returns only the initial state") {
    const GridSpec grid = GridSpec::unit_square(10, 10);
    const DriftDiffusionModel model = pure_diffusion_model(0.05);
    const auto run = run_reference(uniform_density(grid), model, 0.0, 0.1);
    CHECK(run.size() == 1);
    CHECK(run.front().t == 0.0);
}

TEST_CASE("scenario run ends bimodal at the rotated means and stays positive") {
    const GridSpec grid = GridSpec::unit_square(30, 30);
    const MixtureSpec mixture = spinning_mixture_spec();
    const DriftDiffusionModel model = scenario_model(mixture, 0.03);
    const double t_end = 60.0;
    const auto run = run_reference(uniform_density(grid), model, t_end, 0.1, 0);
    const ScalarField& p = run.back().p;

    CHECK(p.values.minCoeff() >= -1e-10);
    CHECK(std::abs(mass(p) - 1.0) <= 1e-8);

    // The two highest local peaks should each sit within one cell of a mode.
    const Eigen::Vector2d mu0 = mixture.means[0](t_end);
    const Eigen::Vector2d mu1 = mixture.means[1](t_end);
    double best0 = 1e9, best1 = 1e9;
    Eigen::Index argmax;
    p.values.maxCoeff(&argmax);
    for (int iy = 0; iy < grid.ny; ++iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            if (p.at(ix, iy) < 0.5 * p.values[argmax]) continue;
            const Eigen::Vector2d cell = grid.cell_center(ix, iy);
            best0 = std::min(best0, (cell - mu0).norm());
            best1 = std::min(best1, (cell - mu1).norm());
        }
    }
    const double one_cell = std::hypot(grid.dx, grid.dy);
    CHECK(best0 <= one_cell);
    CHECK(best1 <= one_cell);
}
