#include "mfd/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mfd/model.hpp"
#include "mfd/kde.hpp"
#include "mfd/reference.hpp"

namespace mfd {

GridSpec RunConfig::central_grid() const {
    return GridSpec::make(x_min, x_max, y_min, y_max, grid_central_nx, grid_central_ny);
}

GridSpec RunConfig::distributed_grid() const {
    return GridSpec::make(x_min, x_max, y_min, y_max, grid_distributed_nx,
                          grid_distributed_ny);
}

namespace {

using nlohmann::json;

const std::set<std::string> kKnownKeys = {
    "scenario",        "model",          "grid_central",     "grid_distributed",
    "domain",          "dt",             "steps",            "snapshot_every",
    "agents",          "noise_d",        "bandwidth",        "alpha",
    "a",               "b",              "theta",            "c",
    "floor",           "graph_policy",   "graph_radius",     "consensus_substeps",
    "seed",            "tracked",        "out_dir",          "write_pgm"};

const json& require(const json& doc, const std::string& key) {
    auto it = doc.find(key);
    if (it == doc.end()) {
        throw ConfigError("config: missing required key \"" + key + "\"");
    }
    return *it;
}

ScenarioKind parse_scenario(const std::string& s) {
    if (s == "centralized") return ScenarioKind::Centralized;
    if (s == "distributed") return ScenarioKind::Distributed;
    if (s == "both") return ScenarioKind::Both;
    throw ConfigError("config: unknown scenario \"" + s + "\"");
}

ModelKind parse_model(const std::string& s) {
    if (s == "spinning_mixture") return ModelKind::SpinningMixture;
    if (s == "pure_diffusion") return ModelKind::PureDiffusion;
    if (s == "constant_drift") return ModelKind::ConstantDrift;
    throw ConfigError("config: unknown model \"" + s + "\"");
}

GraphPolicy parse_graph_policy(const std::string& s) {
    if (s == "complete") return GraphPolicy::Complete;
    if (s == "static_disk") return GraphPolicy::StaticDisk;
    if (s == "rebuilt_disk") return GraphPolicy::RebuiltDisk;
    throw ConfigError("config: unknown graph_policy \"" + s + "\"");
}

}  // namespace

std::string to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::Centralized: return "centralized";
        case ScenarioKind::Distributed: return "distributed";
        case ScenarioKind::Both: return "both";
    }
    return "?";
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::SpinningMixture: return "spinning_mixture";
        case ModelKind::PureDiffusion: return "pure_diffusion";
        case ModelKind::ConstantDrift: return "constant_drift";
    }
    return "?";
}

std::string to_string(GraphPolicy policy) {
    switch (policy) {
        case GraphPolicy::Complete: return "complete";
        case GraphPolicy::StaticDisk: return "static_disk";
        case GraphPolicy::RebuiltDisk: return "rebuilt_disk";
    }
    return "?";
}

RunConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config: top level must be an object");
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (kKnownKeys.find(key) == kKnownKeys.end()) {
            throw ConfigError("config: unknown key \"" + key + "\"");
        }
    }

    RunConfig cfg;
    try {
        cfg.scenario = parse_scenario(require(doc, "scenario").get<std::string>());
        cfg.model = parse_model(require(doc, "model").get<std::string>());

        const auto& gc = require(doc, "grid_central");
        cfg.grid_central_nx = gc.at(0).get<int>();
        cfg.grid_central_ny = gc.at(1).get<int>();
        const auto& gd = require(doc, "grid_distributed");
        cfg.grid_distributed_nx = gd.at(0).get<int>();
        cfg.grid_distributed_ny = gd.at(1).get<int>();
        const auto& dom = require(doc, "domain");
        cfg.x_min = dom.at(0).get<double>();
        cfg.x_max = dom.at(1).get<double>();
        cfg.y_min = dom.at(2).get<double>();
        cfg.y_max = dom.at(3).get<double>();

        cfg.dt = require(doc, "dt").get<double>();
        cfg.steps = require(doc, "steps").get<int>();
        cfg.snapshot_every = require(doc, "snapshot_every").get<int>();
        cfg.agents = require(doc, "agents").get<int>();
        cfg.noise_d = require(doc, "noise_d").get<double>();
        cfg.bandwidth = require(doc, "bandwidth").get<double>();
        cfg.alpha = require(doc, "alpha").get<double>();
        cfg.a = require(doc, "a").get<double>();
        cfg.b = require(doc, "b").get<double>();
        cfg.theta = require(doc, "theta").get<double>();
        cfg.c = require(doc, "c").get<double>();
        cfg.floor = require(doc, "floor").get<double>();
        cfg.graph_policy =
            parse_graph_policy(require(doc, "graph_policy").get<std::string>());
        cfg.graph_radius = require(doc, "graph_radius").get<double>();
        cfg.consensus_substeps = require(doc, "consensus_substeps").get<int>();
        cfg.seed = require(doc, "seed").get<std::uint64_t>();
        cfg.tracked = require(doc, "tracked").get<int>();
        cfg.out_dir = require(doc, "out_dir").get<std::string>();
        cfg.write_pgm = require(doc, "write_pgm").get<bool>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: malformed value: ") + e.what());
    }

    validate_config(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot read \"" + path + "\"");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

void validate_config(const RunConfig& cfg) {
    const GridSpec central = cfg.central_grid();          // validates bounds/counts
    const GridSpec distributed = cfg.distributed_grid();  // likewise
    if (!(cfg.dt > 0.0)) throw ConfigError("config: dt must be > 0");
    if (cfg.steps < 0) throw ConfigError("config: steps must be >= 0");
    if (cfg.snapshot_every < 0) throw ConfigError("config: snapshot_every must be >= 0");
    if (cfg.agents < 1) throw ConfigError("config: agents must be >= 1");
    if (!(cfg.noise_d > 0.0)) throw ConfigError("config: noise_d must be > 0");
    if (!(cfg.bandwidth > 0.0)) throw ConfigError("config: bandwidth must be > 0");
    if (!(cfg.alpha > 0.0)) throw ConfigError("config: alpha must be > 0");
    if (!(cfg.a > 0.0) || !(cfg.b > 0.0)) {
        throw ConfigError("config: consensus gains a, b must be > 0");
    }
    if (cfg.theta < 0.0) throw ConfigError("config: theta must be >= 0");
    if (!(cfg.c > 0.0)) throw ConfigError("config: c must be > 0");
    if (!(cfg.floor > 0.0)) throw ConfigError("config: floor must be > 0");
    if (!(cfg.graph_radius > 0.0)) throw ConfigError("config: graph_radius must be > 0");
    if (cfg.consensus_substeps < 1) {
        throw ConfigError("config: consensus_substeps must be >= 1");
    }
    if (cfg.tracked < 1 || cfg.tracked > cfg.agents) {
        throw ConfigError("config: tracked must be in [1, agents]");
    }
    if (cfg.theta > 0.0 && cfg.tracked != cfg.agents) {
        throw ConfigError(
            "config: theta > 0 requires tracked == agents (coupling needs every "
            "neighbor's estimate)");
    }
    if (cfg.out_dir.empty()) throw ConfigError("config: out_dir must not be empty");

    // Consensus Euler stability for the worst-case degree under a complete
    // graph; disk graphs are re-checked per step against the realized degree.
    if (cfg.graph_policy == GraphPolicy::Complete) {
        const double dt_sub = cfg.dt / cfg.consensus_substeps;
        const double margin = dt_sub * (cfg.alpha + cfg.a * (cfg.agents - 1));
        if (!(margin < 2.0)) {
            throw ConfigError(
                "config: consensus step unstable for a complete graph; "
                "dt/substeps*(alpha + a*(N-1)) = " + std::to_string(margin));
        }
    }

    // Reference stability at t = 0 on both grids; the step itself re-checks
    // the bound every step for time-varying models.
    const MixtureSpec mixture = spinning_mixture_spec();
    DriftDiffusionModel model;
    switch (cfg.model) {
        case ModelKind::SpinningMixture: model = scenario_model(mixture, cfg.noise_d); break;
        case ModelKind::PureDiffusion: model = pure_diffusion_model(cfg.noise_d); break;
        case ModelKind::ConstantDrift:
            model = constant_drift_model(Eigen::Vector2d(0.1, 0.0), cfg.noise_d);
            break;
    }
    // The runs substep internally when dt exceeds the generator's stability
    // bound; reject configs so stiff that the substep count blows up, and
    // configs whose covariance floor leaves the filter gain explosive at
    // clamped cells.
    KernelSpec kernel;
    kernel.h = cfg.bandwidth;
    const double kb = kbar(cfg.agents, kernel);
    for (const GridSpec& grid : {central, distributed}) {
        const GeneratorMatrix gen =
            assemble_generator(grid, model.drift, model.diffusion, 0.0);
        int substeps = 1;
        try {
            substeps = stable_substeps(gen, cfg.dt);
        } catch (const NumericalError& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
        const double gain_stiffness = (cfg.dt / substeps) * 2.0 * kb / cfg.floor;
        if (gain_stiffness > 1.8) {
            throw ConfigError(
                "config: floor=" + std::to_string(cfg.floor) +
                " leaves the filter gain stiffness dt*2*kbar/floor = " +
                std::to_string(gain_stiffness) +
                " > 1.8 on a " + std::to_string(grid.nx) + "x" +
                std::to_string(grid.ny) + " grid; raise floor");
        }
    }
}

}  // namespace mfd
