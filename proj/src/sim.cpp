#include "mfd/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mfd/parallel.hpp"
#include "mfd/rng.hpp"

namespace mfd {

void RunHealth::merge_field_as_density(const ScalarField& f, double& dev_slot) {
    dev_slot = std::max(dev_slot, std::abs(mass(f) - 1.0));
}

RunWriter::RunWriter(const std::string& dir, bool write_pgm)
    : dir_(dir), pgm_(write_pgm), metrics_((ensure_directory(dir), dir + "/metrics.csv")) {}

void RunWriter::snapshot(const std::string& estimator, int step,
                         const ScalarField& field) {
    if (!field.finite()) {
        throw NumericalError("snapshot " + estimator + ": non-finite values");
    }
    if (std::abs(mass(field) - 1.0) > 1e-6) {
        throw NumericalError("snapshot " + estimator + ": mass deviates by more than 1e-6");
    }
    const std::string base = dir_ + "/" + estimator + "_t" + std::to_string(step);
    write_field_csv(base + ".csv", field);
    if (pgm_) write_field_pgm(base + ".pgm", field);
}

void RunWriter::metrics_row(const std::string& estimator, const MetricsRecord& rec) {
    metrics_.append(estimator, rec);
}

DriftDiffusionModel make_model(const RunConfig& config) {
    switch (config.model) {
        case ModelKind::SpinningMixture:
            return scenario_model(spinning_mixture_spec(), config.noise_d);
        case ModelKind::PureDiffusion:
            return pure_diffusion_model(config.noise_d);
        case ModelKind::ConstantDrift:
            return constant_drift_model(Eigen::Vector2d(0.1, 0.0), config.noise_d);
    }
    throw ConfigError("make_model: unknown model kind");
}

std::vector<double> series_l2(const std::vector<MetricsRecord>& records) {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.l2_err);
    return out;
}

std::vector<double> series_grad_l2(const std::vector<MetricsRecord>& records) {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.grad_l2_err);
    return out;
}

std::vector<int> select_tracked_agents(int n_agents, int tracked, std::uint64_t seed) {
    std::vector<int> perm(static_cast<std::size_t>(n_agents));
    std::iota(perm.begin(), perm.end(), 0);
    // Fisher-Yates driven by the counter RNG.
    for (int i = n_agents - 1; i > 0; --i) {
        const double u = rng::uniform01(seed, rng::Stream::ReportSelection, 0, 0,
                                        static_cast<std::uint64_t>(i));
        const int j = std::min(i, static_cast<int>(u * (i + 1)));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    perm.resize(static_cast<std::size_t>(std::min(tracked, n_agents)));
    return perm;
}

namespace {

enum class CovSource { Kde, Reference };

CentralizedRunResult run_central_impl(const RunConfig& cfg, CovSource source,
                                      RunWriter* writer) {
    const GridSpec grid = cfg.central_grid();
    const DriftDiffusionModel model = make_model(cfg);
    validate_ellipticity(model, grid, 0.0);
    KernelSpec kernel;
    kernel.h = cfg.bandwidth;
    const double kb = kbar(cfg.agents, kernel);

    AgentEnsemble ens = init_uniform(cfg.agents, grid, cfg.seed);
    ScalarField y = kde_estimate(ens, kernel, grid);
    ScalarField p_ref = uniform_density(grid);

    CentralFilterState state;
    state.p_hat = y;  // p_hat(0) = p_KDE(0)
    state.cov = initial_covariance(grid.cells(), kb);
    state.t = 0.0;

    CentralizedRunResult result;
    const std::string filter_name = source == CovSource::Kde ? "central" : "oracle";

    auto record = [&](int step) {
        const double t = step * cfg.dt;
        MetricsRecord rec_kde = compute_metrics(y, p_ref);
        rec_kde.t = t;
        MetricsRecord rec_f = compute_metrics(state.p_hat, p_ref);
        rec_f.t = t;
        result.kde.push_back(rec_kde);
        result.filter.push_back(rec_f);
        if (writer != nullptr) {
            writer->metrics_row("kde", rec_kde);
            writer->metrics_row(filter_name, rec_f);
        }

        result.health.merge_field_as_density(p_ref, result.health.max_mass_dev_reference);
        result.health.min_reference =
            std::min(result.health.min_reference, p_ref.values.minCoeff());
        result.health.merge_field_as_density(state.p_hat,
                                             result.health.max_mass_dev_filter);
        const double cov_norm = state.cov.norm();
        if (cov_norm > 0.0) {
            result.health.max_cov_ones_residual =
                std::max(result.health.max_cov_ones_residual,
                         state.cov.ones_residual() / cov_norm);
        }
    };
    auto snapshot = [&](int step) {
        if (writer == nullptr) return;
        writer->snapshot("reference", step, p_ref);
        writer->snapshot("kde", step, y);
        writer->snapshot(filter_name, step, state.p_hat);
    };

    record(0);
    snapshot(0);

    GeneratorMatrix gen =
        assemble_generator(grid, model.drift, model.diffusion, 0.0);
    for (int k = 0; k < cfg.steps; ++k) {
        const double t = k * cfg.dt;
        if (!model.autonomous && k > 0) {
            gen = assemble_generator(grid, model.drift, model.diffusion, t);
        }
        step_ensemble(ens, model, t, cfg.dt, grid);
        y = kde_estimate(ens, kernel, grid);
        const ReferenceState next_ref = propagate_reference({p_ref, t}, gen, cfg.dt);
        const DiagonalCovariance r = make_diag_cov(
            source == CovSource::Kde ? y : next_ref.p, kb, cfg.floor);
        central_filter_advance(state, gen, y, r, cfg.dt);
        p_ref = next_ref.p;

        record(k + 1);
        const bool last = k + 1 == cfg.steps;
        if (last || (cfg.snapshot_every > 0 && (k + 1) % cfg.snapshot_every == 0)) {
            snapshot(k + 1);
        }
    }

    result.reference_final = p_ref;
    result.filter_final = state.p_hat;
    result.kde_final = y;
    return result;
}

}  // namespace

CentralizedRunResult run_centralized(const RunConfig& config, RunWriter* writer) {
    return run_central_impl(config, CovSource::Kde, writer);
}

CentralizedRunResult run_optimal_oracle(const RunConfig& config, RunWriter* writer) {
    return run_central_impl(config, CovSource::Reference, writer);
}

DistributedRunResult run_distributed(const RunConfig& cfg, RunWriter* writer,
                                     int n_workers) {
    if (cfg.theta > 0.0 && cfg.tracked != cfg.agents) {
        throw ConfigError(
            "run_distributed: theta > 0 requires tracking every agent");
    }
    const GridSpec grid = cfg.distributed_grid();
    const DriftDiffusionModel model = make_model(cfg);
    validate_ellipticity(model, grid, 0.0);
    KernelSpec kernel;
    kernel.h = cfg.bandwidth;
    const double kb = kbar(cfg.agents, kernel);
    const int n = cfg.agents;
    const double dt_sub = cfg.dt / cfg.consensus_substeps;

    AgentEnsemble ens = init_uniform(n, grid, cfg.seed);

    auto sample_kernels = [&]() {
        std::vector<ScalarField> z;
        z.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            z.push_back(kernel_field(ens.positions.row(i).transpose(), kernel, grid));
        }
        return z;
    };
    std::vector<ScalarField> z = sample_kernels();
    std::vector<ConsensusNodeState> consensus = init_consensus(z);

    CommGraph graph = cfg.graph_policy == GraphPolicy::Complete
                          ? complete_graph(n)
                          : build_disk_graph(ens, cfg.graph_radius);

    std::vector<ScalarField> y_local;
    y_local.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        y_local.push_back(positivity_correct(consensus[static_cast<std::size_t>(i)].psi,
                                             cfg.c));
    }

    DistributedRunResult result;
    const std::vector<int> tracked = select_tracked_agents(n, cfg.tracked, cfg.seed);
    const int n_report = std::min<int>(5, static_cast<int>(tracked.size()));
    result.report_agents.assign(tracked.begin(), tracked.begin() + n_report);
    result.report.resize(static_cast<std::size_t>(n_report));

    std::vector<LocalFilterState> locals(tracked.size());
    // Agent id -> slot in `locals`; -1 when the agent only runs consensus.
    std::vector<int> slot_of_agent(static_cast<std::size_t>(n), -1);
    for (std::size_t s = 0; s < tracked.size(); ++s) {
        const int agent = tracked[s];
        slot_of_agent[static_cast<std::size_t>(agent)] = static_cast<int>(s);
        locals[s].agent = agent;
        locals[s].p_hat = y_local[static_cast<std::size_t>(agent)];
        locals[s].cov = initial_covariance(grid.cells(), kb);
        locals[s].t = 0.0;
    }

    ScalarField p_ref = uniform_density(grid);
    ScalarField y_global = kde_estimate(ens, kernel, grid);

    auto step_telemetry = [&](double t, double variation) {
        MetricsRecord rec;
        rec.t = t;
        rec.connected = graph.connected;
        rec.input_variation = variation;
        double track = 0.0;
        for (int i = 0; i < n; ++i) {
            const ScalarField diff(grid, y_local[static_cast<std::size_t>(i)].values -
                                             y_global.values);
            track = std::max(track, l2_norm(diff));
        }
        rec.consensus_track_err = track;
        return rec;
    };

    auto record = [&](int step, double variation) {
        const double t = step * cfg.dt;
        const MetricsRecord step_rec = step_telemetry(t, variation);
        result.steps.push_back(step_rec);

        MetricsRecord rec_kde = compute_metrics(y_global, p_ref);
        rec_kde.t = t;
        rec_kde.consensus_track_err = step_rec.consensus_track_err;
        rec_kde.input_variation = variation;
        rec_kde.connected = step_rec.connected;
        result.kde.push_back(rec_kde);
        if (writer != nullptr) writer->metrics_row("kde", rec_kde);

        for (int s = 0; s < n_report; ++s) {
            const LocalFilterState& st = locals[static_cast<std::size_t>(s)];
            MetricsRecord rec = compute_metrics(st.p_hat, p_ref);
            rec.t = t;
            rec.consensus_track_err = step_rec.consensus_track_err;
            rec.input_variation = variation;
            rec.connected = step_rec.connected;
            result.report[static_cast<std::size_t>(s)].push_back(rec);
            if (writer != nullptr) {
                writer->metrics_row("local" + std::to_string(st.agent), rec);
            }
        }

        RunHealth& h = result.health;
        h.merge_field_as_density(p_ref, h.max_mass_dev_reference);
        h.min_reference = std::min(h.min_reference, p_ref.values.minCoeff());
        h.always_connected = h.always_connected && graph.connected;
        for (int i = 0; i < n; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            h.merge_field_as_density(consensus[idx].psi, h.max_mass_dev_psi);
            h.merge_field_as_density(consensus[idx].phi, h.max_mass_dev_phi);
            h.merge_field_as_density(y_local[idx], h.max_mass_dev_y);
            h.min_y = std::min(h.min_y, y_local[idx].values.minCoeff());
        }
        for (const LocalFilterState& st : locals) {
            h.merge_field_as_density(st.p_hat, h.max_mass_dev_filter);
            const double cov_norm = st.cov.norm();
            if (cov_norm > 0.0) {
                h.max_cov_ones_residual = std::max(
                    h.max_cov_ones_residual, st.cov.ones_residual() / cov_norm);
            }
        }
    };

    auto snapshot = [&](int step) {
        if (writer == nullptr) return;
        writer->snapshot("reference", step, p_ref);
        writer->snapshot("kde", step, y_global);
        for (int s = 0; s < n_report; ++s) {
            const LocalFilterState& st = locals[static_cast<std::size_t>(s)];
            writer->snapshot("local" + std::to_string(st.agent), step, st.p_hat);
        }
    };

    record(0, 0.0);
    snapshot(0);

    GeneratorMatrix gen =
        assemble_generator(grid, model.drift, model.diffusion, 0.0);
    std::vector<ScalarField> z_prev = z;
    for (int k = 0; k < cfg.steps; ++k) {
        const double t = k * cfg.dt;
        if (!model.autonomous && k > 0) {
            gen = assemble_generator(grid, model.drift, model.diffusion, t);
        }

        // World update.
        step_ensemble(ens, model, t, cfg.dt, grid, n_workers);
        z_prev.swap(z);
        z = sample_kernels();
        const double variation = input_variation(z, z_prev, cfg.dt);
        if (cfg.graph_policy == GraphPolicy::RebuiltDisk) {
            graph = build_disk_graph(ens, cfg.graph_radius);
        }

        // Consensus exchanges (substeps), then the positivity correction.
        for (int sub = 0; sub < cfg.consensus_substeps; ++sub) {
            pi_consensus_step(consensus, z, graph, cfg.alpha, cfg.a, cfg.b, dt_sub);
        }
        for (int i = 0; i < n; ++i) {
            y_local[static_cast<std::size_t>(i)] = positivity_correct(
                consensus[static_cast<std::size_t>(i)].psi, cfg.c);
        }
        y_global = kde_estimate(ens, kernel, grid);

        const ReferenceState next_ref = propagate_reference({p_ref, t}, gen, cfg.dt);

        // Local filters read the previous barrier's neighbor estimates.
        std::vector<ScalarField> old_estimates;
        if (cfg.theta > 0.0) {
            old_estimates.reserve(locals.size());
            for (const LocalFilterState& st : locals) old_estimates.push_back(st.p_hat);
        }
        parallel_for(static_cast<int>(locals.size()), n_workers, [&](int s) {
            LocalFilterState& st = locals[static_cast<std::size_t>(s)];
            const auto agent = static_cast<std::size_t>(st.agent);
            const DiagonalCovariance r_i = make_diag_cov(y_local[agent], kb, cfg.floor);
            std::vector<const ScalarField*> neighbor_estimates;
            if (cfg.theta > 0.0) {
                for (int j : graph.neighbors[agent]) {
                    const int neighbor_slot = slot_of_agent[static_cast<std::size_t>(j)];
                    if (neighbor_slot >= 0) {
                        neighbor_estimates.push_back(
                            &old_estimates[static_cast<std::size_t>(neighbor_slot)]);
                    }
                }
            }
            local_filter_advance(st, gen, y_local[agent], r_i, neighbor_estimates,
                              cfg.theta, cfg.dt);
        });
        p_ref = next_ref.p;

        record(k + 1, variation);
        const bool last = k + 1 == cfg.steps;
        if (last || (cfg.snapshot_every > 0 && (k + 1) % cfg.snapshot_every == 0)) {
            snapshot(k + 1);
        }
    }
    return result;
}

void run_scenario(const std::string& config_path, const ScenarioOverrides& overrides) {
    RunConfig cfg = load_config(config_path);
    if (overrides.seed) cfg.seed = *overrides.seed;
    if (overrides.steps) cfg.steps = *overrides.steps;
    if (overrides.out_dir) cfg.out_dir = *overrides.out_dir;
    validate_config(cfg);

    ensure_directory(cfg.out_dir);
    if (cfg.scenario == ScenarioKind::Centralized || cfg.scenario == ScenarioKind::Both) {
        RunWriter writer(cfg.out_dir + "/centralized", cfg.write_pgm);
        run_centralized(cfg, &writer);
    }
    if (cfg.scenario == ScenarioKind::Distributed || cfg.scenario == ScenarioKind::Both) {
        RunWriter writer(cfg.out_dir + "/distributed", cfg.write_pgm);
        run_distributed(cfg, &writer);
    }
}

}  // namespace mfd
