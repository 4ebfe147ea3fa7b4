// Euler-Maruyama ensemble of agents with mirror reflection at the boundary.
#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "mfd/grid.hpp"
#include "mfd/model.hpp"

namespace mfd {

struct AgentEnsemble {
    Eigen::Matrix<double, Eigen::Dynamic, 2> positions;  // N x 2, inside the domain
    std::uint64_t seed = 0;
    std::uint64_t step_count = 0;  // RNG substream index for the next step

    int size() const { return static_cast<int>(positions.rows()); }
};

// i.i.d. uniform positions on the open domain; reproducible per seed.
AgentEnsemble init_uniform(int n, const GridSpec& grid, std::uint64_t seed);

// One Euler-Maruyama step with per-agent counter-based noise streams.
// Proposals outside the domain are mirror-reflected until inside.
void step_ensemble(AgentEnsemble& ens, const DriftDiffusionModel& model, double t,
                   double dt, const GridSpec& grid, int n_workers = 1);

}  // namespace mfd
