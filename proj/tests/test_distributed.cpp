#include <doctest.h>

#include <cmath>

#include "mfd/consensus.hpp"
#include "mfd/filter.hpp"
#include "mfd/kde.hpp"
#include "mfd/metrics.hpp"
#include "mfd/reference.hpp"
#include "mfd/sim.hpp"

using namespace mfd;

TEST_CASE("theta = 0 with the global observation reproduces the centralized filter") {
    const GridSpec grid = GridSpec::unit_square(12, 12);
    const DriftDiffusionModel model = scenario_model(spinning_mixture_spec(), 0.03);
    KernelSpec kernel;
    const int n_agents = 30;
    const double kb = kbar(n_agents, kernel);
    const double floor = 0.1 * kb;
    AgentEnsemble ens = init_uniform(n_agents, grid, 6);

    const ScalarField y0 = kde_estimate(ens, kernel, grid);
    CentralFilterState central{y0, initial_covariance(grid.cells(), kb), 0.0};
    LocalFilterState local{y0, initial_covariance(grid.cells(), kb), 0, 0.0};

    for (int k = 0; k < 100; ++k) {
        const double t = k * 0.1;
        const GeneratorMatrix gen =
            assemble_generator(grid, model.drift, model.diffusion, t);
        step_ensemble(ens, model, t, 0.1, grid);
        const ScalarField y = kde_estimate(ens, kernel, grid);
        const DiagonalCovariance r = make_diag_cov(y, kb, floor);
        central_filter_advance(central, gen, y, r, 0.1);
        local_filter_advance(local, gen, y, r, {}, 0.0, 0.1);

        CHECK((central.p_hat.values - local.p_hat.values).cwiseAbs().maxCoeff() == 0.0);
        CHECK((central.cov.p - local.cov.p).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("coupling term vanishes when neighbors agree") {
    const GridSpec grid = GridSpec::unit_square(10, 10);
    const DriftDiffusionModel model = pure_diffusion_model(0.05);
    const GeneratorMatrix gen =
        assemble_generator(grid, model.drift, model.diffusion, 0.0);
    KernelSpec kernel;
    const double kb = kbar(10, kernel);
    AgentEnsemble ens = init_uniform(10, grid, 3);
    const ScalarField y = kde_estimate(ens, kernel, grid);
    const DiagonalCovariance r = make_diag_cov(y, kb, 0.1 * kb);

    LocalFilterState coupled{y, initial_covariance(grid.cells(), kb), 0, 0.0};
    LocalFilterState solo = coupled;

    // Every neighbor holds exactly this agent's estimate.
    const ScalarField copy1 = coupled.p_hat;
    const ScalarField copy2 = coupled.p_hat;
    local_filter_step(coupled, gen, y, r, {&copy1, &copy2}, 0.4, 0.05);
    local_filter_step(solo, gen, y, r, {}, 0.0, 0.05);
    CHECK((coupled.p_hat.values - solo.p_hat.values).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((coupled.cov.p - solo.cov.p).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("two-agent two-cell coupling hand calculation") {
    GridSpec tiny;
    tiny.x_min = 0.0;
    tiny.x_max = 1.0;
    tiny.y_min = 0.0;
    tiny.y_max = 1.0;
    tiny.nx = 2;
    tiny.ny = 1;
    tiny.dx = 0.5;
    tiny.dy = 1.0;

    GeneratorMatrix zero_gen;
    zero_gen.matrix.resize(2, 2);
    zero_gen.max_abs_diagonal = 0.0;

    const double p0 = 0.2, theta = 0.5, dt = 0.1;
    const double r_value = 4.0;  // R = 0.25 I
    DiagonalCovariance r;
    r.floor = 1e-9;
    r.diag = Eigen::ArrayXd::Constant(2, 1.0 / r_value);

    // Both agents see the same observation y; estimates disagree.
    ScalarField y(tiny, Eigen::Vector2d(1.0, 1.0));
    LocalFilterState a{ScalarField(tiny, Eigen::Vector2d(1.2, 0.8)),
                       initial_covariance(2, p0), 0, 0.0};
    LocalFilterState b{ScalarField(tiny, Eigen::Vector2d(0.8, 1.2)),
                       initial_covariance(2, p0), 1, 0.0};
    const ScalarField b_est = b.p_hat;
    const ScalarField a_est = a.p_hat;

    local_filter_step(a, zero_gen, y, r, {&b_est}, theta, dt);
    local_filter_step(b, zero_gen, y, r, {&a_est}, theta, dt);

    // Hand arithmetic in the antisymmetric coordinate d = p1 - p2 (per
    // agent): innovation contracts d by dt*p0*r, coupling by 2*dt*theta*p0
    // toward the neighbor's d.
    // a: d = 0.4; innovation: -dt*p0*r*0.4 = -0.032; coupling: Pi*(b - a) =
    // (-0.4, 0.4) scaled: dt*theta*p0*(-0.8)/... work through entries:
    const double innovation_shift = dt * p0 * r_value * (1.0 - 1.2);  // cell 0 of a
    const double coupling_shift = dt * theta * p0 * 0.5 * ((0.8 - 1.2) - (1.2 - 0.8));
    CHECK(a.p_hat.values[0] ==
          doctest::Approx(1.2 + innovation_shift + coupling_shift).epsilon(1e-12));
    CHECK(a.p_hat.values[1] ==
          doctest::Approx(0.8 - innovation_shift - coupling_shift).epsilon(1e-12));
    // Symmetry: agent b mirrors agent a.
    CHECK(b.p_hat.values[0] == doctest::Approx(a.p_hat.values[1]).epsilon(1e-12));

    // Coupling contracts the disagreement faster than theta = 0 would.
    const double disagreement_after =
        std::abs(a.p_hat.values[0] - b.p_hat.values[0]);
    const double theta0_disagreement =
        std::abs((1.2 + innovation_shift) - (0.8 - innovation_shift));
    CHECK(disagreement_after < theta0_disagreement);
}

TEST_CASE("zero agents is rejected as configuration") {
    RunConfig cfg;
    cfg.agents = 0;
    cfg.tracked = 1;
    CHECK_THROWS_AS(run_centralized(cfg), ConfigError);
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
}

TEST_CASE("single agent: consensus output is its own kernel") {
    RunConfig cfg;
    cfg.scenario = ScenarioKind::Distributed;
    cfg.grid_distributed_nx = 10;
    cfg.grid_distributed_ny = 10;
    cfg.steps = 20;
    cfg.agents = 1;
    cfg.tracked = 1;
    cfg.graph_policy = GraphPolicy::Complete;
    cfg.floor = 1.5;  // kbar(1) ~ 12.4
    cfg.seed = 2;
    const DistributedRunResult res = run_distributed(cfg, nullptr, 1);
    CHECK(res.report_agents == std::vector<int>{0});
    // One node: the global KDE is the agent's own kernel and the consensus
    // state is a first-order lag on it; the filter consumes a single-kernel
    // observation. The pipeline must stay healthy throughout.
    for (const auto& rec : res.steps) {
        CHECK(rec.consensus_track_err <= 6.0);  // bounded lag, no blowup
        CHECK(rec.connected);
    }
    CHECK(res.health.max_mass_dev_y <= 1e-12);
    CHECK(res.health.max_mass_dev_psi <= 1e-10);
    CHECK(res.health.max_mass_dev_filter <= 1e-8);
}

TEST_CASE("distributed run conserves every tracked mass and stays connected") {
    RunConfig cfg;
    cfg.scenario = ScenarioKind::Distributed;
    cfg.grid_distributed_nx = 10;
    cfg.grid_distributed_ny = 10;
    cfg.steps = 80;
    cfg.agents = 20;
    cfg.tracked = 20;
    cfg.theta = 0.4;
    cfg.graph_policy = GraphPolicy::RebuiltDisk;
    cfg.graph_radius = 0.6;
    cfg.consensus_substeps = 2;
    cfg.seed = 11;
    cfg.floor = 0.06;  // 20 agents: kbar ~ 0.62
    const DistributedRunResult res = run_distributed(cfg, nullptr, 2);

    CHECK(res.health.max_mass_dev_psi <= 1e-10);
    CHECK(res.health.max_mass_dev_phi <= 1e-10);
    CHECK(res.health.max_mass_dev_y <= 1e-12);
    CHECK(res.health.max_mass_dev_filter <= 1e-8);
    CHECK(res.health.max_mass_dev_reference <= 1e-8);
    CHECK(res.health.min_y > 0.0);
    CHECK(res.health.min_reference >= -1e-10);
    CHECK(res.report_agents.size() == 5);
    CHECK(res.report.front().size() == static_cast<std::size_t>(cfg.steps) + 1);
}

TEST_CASE("worker count does not change the distributed run") {
    RunConfig cfg;
    cfg.scenario = ScenarioKind::Distributed;
    cfg.grid_distributed_nx = 8;
    cfg.grid_distributed_ny = 8;
    cfg.steps = 25;
    cfg.agents = 12;
    cfg.tracked = 12;
    cfg.theta = 0.4;
    cfg.graph_radius = 0.8;
    cfg.seed = 5;
    cfg.floor = 0.11;  // 12 agents: kbar ~ 1.04

    const DistributedRunResult serial = run_distributed(cfg, nullptr, 1);
    const DistributedRunResult threaded = run_distributed(cfg, nullptr, 3);
    for (std::size_t s = 0; s < serial.report.size(); ++s) {
        for (std::size_t k = 0; k < serial.report[s].size(); ++k) {
            CHECK(serial.report[s][k].l2_err == threaded.report[s][k].l2_err);
            CHECK(serial.report[s][k].h1_err == threaded.report[s][k].h1_err);
        }
    }
}

TEST_CASE("stronger consensus gains tighten the filter error") {
    RunConfig base;
    base.scenario = ScenarioKind::Distributed;
    base.grid_distributed_nx = 12;
    base.grid_distributed_ny = 12;
    base.steps = 200;
    base.agents = 16;
    base.tracked = 16;
    base.theta = 0.0;
    base.graph_policy = GraphPolicy::Complete;
    base.seed = 2;
    base.floor = 0.08;  // 16 agents: kbar ~ 0.78

    auto tracked_error_sum = [&](double a, double b) {
        RunConfig cfg = base;
        cfg.a = a;
        cfg.b = b;
        const DistributedRunResult res = run_distributed(cfg, nullptr, 2);
        double total = 0.0;
        for (const auto& series : res.report) {
            total += time_average(series_l2(series), 0.5);
        }
        return total;
    };

    const double weak = tracked_error_sum(0.1, 0.01);
    const double strong = tracked_error_sum(0.8, 0.08);
    CHECK(strong < weak);
}

TEST_CASE("estimate coupling does not increase the disagreement") {
    RunConfig base;
    base.scenario = ScenarioKind::Distributed;
    base.grid_distributed_nx = 10;
    base.grid_distributed_ny = 10;
    base.steps = 150;
    base.agents = 12;
    base.tracked = 12;
    base.graph_policy = GraphPolicy::Complete;
    base.seed = 9;
    base.floor = 0.11;  // 12 agents: kbar ~ 1.04

    auto final_disagreement = [&](double theta) {
        RunConfig cfg = base;
        cfg.theta = theta;
        const DistributedRunResult res = run_distributed(cfg, nullptr, 2);
        // Use the spread of the reported estimates against each other via
        // their recorded errors: compare max pairwise |l2_err| gap at the end.
        double lo = 1e300, hi = 0.0;
        for (const auto& series : res.report) {
            const double e = series.back().l2_err;
            lo = std::min(lo, e);
            hi = std::max(hi, e);
        }
        return hi - lo;
    };

    const double spread_theta0 = final_disagreement(0.0);
    const double spread_theta4 = final_disagreement(0.4);
    CHECK(spread_theta4 <= spread_theta0 + 1e-12);
}
