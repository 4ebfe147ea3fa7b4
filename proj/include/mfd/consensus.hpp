// PI dynamic average consensus over kernel fields, with the
// shift-and-renormalize positivity correction.
#pragma once

#include <vector>

#include "mfd/agents.hpp"
#include "mfd/grid.hpp"

namespace mfd {

struct CommGraph {
    int n = 0;
    std::vector<std::vector<int>> neighbors;  // sorted, symmetric, no self-loops
    bool connected = false;

    int max_degree() const;
    int edge_count() const;
};

// Edge (i,j) iff |X_i - X_j| <= radius. Disconnection is reported through
// the flag, not an error.
CommGraph build_disk_graph(const AgentEnsemble& ens, double radius);
CommGraph complete_graph(int n);
CommGraph path_graph(int n);

struct ConsensusNodeState {
    ScalarField psi;
    ScalarField phi;
};

// psi_i(0) = z_i(0), phi_i(0) = uniform density.
std::vector<ConsensusNodeState> init_consensus(const std::vector<ScalarField>& inputs);

// One synchronous Euler round of the PI estimator (Jacobi: all nodes read
// the previous round's neighbor states). Gains a (proportional) and b
// (integral) are uniform across edges. Throws ConfigError when
// dt*(alpha + a*max_degree) >= 2, the explicit-Euler stability surrogate.
void pi_consensus_step(std::vector<ConsensusNodeState>& states,
                       const std::vector<ScalarField>& inputs, const CommGraph& graph,
                       double alpha, double a, double b, double dt);

// d = |c - min(psi)| if min(psi) < c else 0; returns (psi + d) normalized to
// unit grid L1 norm. Output has mass one and a strictly positive minimum.
ScalarField positivity_correct(const ScalarField& psi, double c);

}  // namespace mfd
