// Run configuration: strict JSON schema, validated fail-fast at load.
#pragma once

#include <cstdint>
#include <string>

#include "mfd/grid.hpp"

namespace mfd {

enum class ScenarioKind { Centralized, Distributed, Both };
enum class ModelKind { SpinningMixture, PureDiffusion, ConstantDrift };
enum class GraphPolicy { Complete, StaticDisk, RebuiltDisk };

struct RunConfig {
    ScenarioKind scenario = ScenarioKind::Centralized;
    ModelKind model = ModelKind::SpinningMixture;

    int grid_central_nx = 30, grid_central_ny = 30;
    int grid_distributed_nx = 20, grid_distributed_ny = 20;
    double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;

    double dt = 0.1;
    int steps = 600;
    int snapshot_every = 50;  // 0 disables intermediate snapshots

    int agents = 100;
    double noise_d = 0.03;   // D in the scenario SDE
    double bandwidth = 0.08; // KDE bandwidth h

    double alpha = 0.2;  // PI consensus forgetting gain
    double a = 0.4;      // proportional edge gain
    double b = 0.04;     // integral edge gain
    double theta = 0.0;  // estimate-coupling gain
    double c = 1e-4;     // positivity-correction constant
    // Covariance diagonal clamp. Must keep dt*kbar/floor order-one: the
    // filter gain at clamped cells scales with dt/floor and explicit Euler
    // diverges past that.
    double floor = 0.012;

    GraphPolicy graph_policy = GraphPolicy::RebuiltDisk;
    // Must bridge the two agent clusters once they lock onto the antipodal
    // modes 0.6 apart, or the disk graph splits.
    double graph_radius = 0.65;
    int consensus_substeps = 1;  // consensus exchanges per filter step

    std::uint64_t seed = 1;
    int tracked = 5;  // size of the tracked local-filter subset (theta = 0)
    std::string out_dir = "out";
    bool write_pgm = false;

    GridSpec central_grid() const;
    GridSpec distributed_grid() const;
};

// Parses the JSON document at `path`. Unknown and missing keys are errors
// that name the key; all downstream positivity/stability preconditions are
// checked before returning.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);
void validate_config(const RunConfig& config);

std::string to_string(ScenarioKind kind);
std::string to_string(ModelKind kind);
std::string to_string(GraphPolicy policy);

}  // namespace mfd
