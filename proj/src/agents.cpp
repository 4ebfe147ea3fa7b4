#include "mfd/agents.hpp"

#include <cmath>
#include <string>

#include "mfd/parallel.hpp"
#include "mfd/rng.hpp"

namespace mfd {

namespace {

double reflect_into(double u, double lo, double hi, int agent) {
    for (int iter = 0; iter < 8; ++iter) {
        if (u < lo) {
            u = 2.0 * lo - u;
        } else if (u > hi) {
            u = 2.0 * hi - u;
        } else {
            return u;
        }
    }
    throw NumericalError("step_ensemble: reflection did not terminate for agent " +
                         std::to_string(agent) + "; step too large for the domain");
}

}  // namespace

AgentEnsemble init_uniform(int n, const GridSpec& grid, std::uint64_t seed) {
    if (n < 1) throw ConfigError("init_uniform: need at least one agent");
    AgentEnsemble ens;
    ens.positions.resize(n, 2);
    ens.seed = seed;
    ens.step_count = 0;
    const double wx = grid.x_max - grid.x_min;
    const double wy = grid.y_max - grid.y_min;
    for (int i = 0; i < n; ++i) {
        const auto a = static_cast<std::uint64_t>(i);
        ens.positions(i, 0) =
            grid.x_min + wx * rng::uniform01(seed, rng::Stream::AgentInit, a, 0, 0);
        ens.positions(i, 1) =
            grid.y_min + wy * rng::uniform01(seed, rng::Stream::AgentInit, a, 0, 1);
    }
    return ens;
}

void step_ensemble(AgentEnsemble& ens, const DriftDiffusionModel& model, double t,
                   double dt, const GridSpec& grid, int n_workers) {
    if (!(dt > 0.0)) throw ConfigError("step_ensemble: dt must be > 0");
    const double sqrt_dt = std::sqrt(dt);
    const std::uint64_t step = ens.step_count;

    parallel_for(ens.size(), n_workers, [&](int i) {
        const Eigen::Vector2d x = ens.positions.row(i).transpose();
        const Eigen::Vector2d v = model.drift(x, t);
        const Eigen::Matrix2d s = model.noise(x, t);
        double z0 = 0.0, z1 = 0.0;
        rng::normal_pair(ens.seed, rng::Stream::AgentStep,
                         static_cast<std::uint64_t>(i), step, 0, z0, z1);
        const Eigen::Vector2d proposal =
            x + v * dt + sqrt_dt * (s * Eigen::Vector2d(z0, z1));
        ens.positions(i, 0) = reflect_into(proposal.x(), grid.x_min, grid.x_max, i);
        ens.positions(i, 1) = reflect_into(proposal.y(), grid.y_min, grid.y_max, i);
    });
    ens.step_count = step + 1;
}

}  // namespace mfd
