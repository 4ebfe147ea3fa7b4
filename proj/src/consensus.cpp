#include "mfd/consensus.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace mfd {

int CommGraph::max_degree() const {
    std::size_t deg = 0;
    for (const auto& adj : neighbors) deg = std::max(deg, adj.size());
    return static_cast<int>(deg);
}

int CommGraph::edge_count() const {
    std::size_t total = 0;
    for (const auto& adj : neighbors) total += adj.size();
    return static_cast<int>(total / 2);
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

bool compute_connected(const CommGraph& g) {
    if (g.n == 0) return false;
    UnionFind uf(g.n);
    for (int i = 0; i < g.n; ++i) {
        for (int j : g.neighbors[static_cast<std::size_t>(i)]) uf.unite(i, j);
    }
    const int root = uf.find(0);
    for (int i = 1; i < g.n; ++i) {
        if (uf.find(i) != root) return false;
    }
    return true;
}

}  // namespace

CommGraph build_disk_graph(const AgentEnsemble& ens, double radius) {
    if (!(radius > 0.0)) throw ConfigError("build_disk_graph: radius must be > 0");
    CommGraph g;
    g.n = ens.size();
    g.neighbors.assign(static_cast<std::size_t>(g.n), {});
    const double r2 = radius * radius;
    for (int i = 0; i < g.n; ++i) {
        for (int j = i + 1; j < g.n; ++j) {
            const double dx = ens.positions(i, 0) - ens.positions(j, 0);
            const double dy = ens.positions(i, 1) - ens.positions(j, 1);
            if (dx * dx + dy * dy <= r2) {
                g.neighbors[static_cast<std::size_t>(i)].push_back(j);
                g.neighbors[static_cast<std::size_t>(j)].push_back(i);
            }
        }
    }
    g.connected = compute_connected(g);
    return g;
}

CommGraph complete_graph(int n) {
    CommGraph g;
    g.n = n;
    g.neighbors.assign(static_cast<std::size_t>(n), {});
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (j != i) g.neighbors[static_cast<std::size_t>(i)].push_back(j);
        }
    }
    g.connected = n >= 1;
    return g;
}

CommGraph path_graph(int n) {
    CommGraph g;
    g.n = n;
    g.neighbors.assign(static_cast<std::size_t>(n), {});
    for (int i = 0; i + 1 < n; ++i) {
        g.neighbors[static_cast<std::size_t>(i)].push_back(i + 1);
        g.neighbors[static_cast<std::size_t>(i + 1)].push_back(i);
    }
    g.connected = n >= 1;
    return g;
}

std::vector<ConsensusNodeState> init_consensus(const std::vector<ScalarField>& inputs) {
    if (inputs.empty()) throw ConfigError("init_consensus: no inputs");
    std::vector<ConsensusNodeState> states;
    states.reserve(inputs.size());
    const ScalarField uniform = uniform_density(inputs.front().grid);
    for (const ScalarField& z : inputs) {
        states.push_back({z, uniform});
    }
    return states;
}

void pi_consensus_step(std::vector<ConsensusNodeState>& states,
                       const std::vector<ScalarField>& inputs, const CommGraph& graph,
                       double alpha, double a, double b, double dt) {
    const std::size_t n = states.size();
    if (inputs.size() != n || static_cast<std::size_t>(graph.n) != n) {
        throw ConfigError("pi_consensus_step: node count mismatch");
    }
    const double stability = dt * (alpha + a * graph.max_degree());
    if (!(stability < 2.0)) {
        throw ConfigError("pi_consensus_step: dt*(alpha + a*max_degree) = " +
                          std::to_string(stability) + " >= 2 (unstable Euler step)");
    }

    std::vector<ConsensusNodeState> next = states;
    Eigen::VectorXd sum_psi(states.front().psi.values.size());
    Eigen::VectorXd sum_phi(states.front().phi.values.size());
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::VectorXd& psi_i = states[i].psi.values;
        const Eigen::VectorXd& phi_i = states[i].phi.values;
        sum_psi.setZero();
        sum_phi.setZero();
        for (int j : graph.neighbors[i]) {
            sum_psi += states[static_cast<std::size_t>(j)].psi.values;
            sum_phi += states[static_cast<std::size_t>(j)].phi.values;
        }
        const double degree = static_cast<double>(graph.neighbors[i].size());
        next[i].psi.values =
            psi_i + dt * (-alpha * (psi_i - inputs[i].values) -
                          a * (degree * psi_i - sum_psi) +
                          b * (degree * phi_i - sum_phi));
        next[i].phi.values = phi_i - dt * b * (degree * psi_i - sum_psi);
    }
    states = std::move(next);
}

ScalarField positivity_correct(const ScalarField& psi, double c) {
    if (!(c > 0.0)) throw ConfigError("positivity_correct: c must be > 0");
    const double min_value = psi.values.minCoeff();
    const double d = min_value < c ? std::abs(c - min_value) : 0.0;
    ScalarField shifted(psi.grid, psi.values.array() + d);
    const double l1 = l1_norm(shifted);
    if (!(l1 > 0.0)) {
        throw NumericalError("positivity_correct: degenerate field with zero L1 norm");
    }
    shifted.values /= l1;
    return shifted;
}

}  // namespace mfd
