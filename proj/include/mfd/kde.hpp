// Kernel density observations on the grid and the noise-scale constant kbar.
#pragma once

#include <Eigen/Dense>

#include "mfd/agents.hpp"
#include "mfd/grid.hpp"

namespace mfd {

enum class KernelType { Gaussian, Epanechnikov };

struct KernelSpec {
    double h = 0.08;                           // bandwidth, domain units
    KernelType kernel = KernelType::Gaussian;  // scenario uses Gaussian
    int dim = 2;
    // Kernel values beyond cutoff_radii * h are dropped before
    // renormalization (mass error < 1e-7 for the Gaussian at 6h).
    double cutoff_radii = 6.0;

    void validate() const;
};

// h^-n K((x - x_i)/h) sampled at cell centers, without the boundary
// renormalization. Exposed for the variance oracle in tests.
ScalarField kernel_field_unnormalized(const Eigen::Vector2d& x_i,
                                      const KernelSpec& spec, const GridSpec& grid);

// Kernel field renormalized to grid mass exactly one (boundary-truncation
// correction); this is the local observation z_i.
ScalarField kernel_field(const Eigen::Vector2d& x_i, const KernelSpec& spec,
                         const GridSpec& grid);

// Mean of kernel_field over the ensemble. Accumulation is pairwise over
// position-sorted agents, so the result is invariant under agent
// permutations bit for bit.
ScalarField kde_estimate(const AgentEnsemble& ens, const KernelSpec& spec,
                         const GridSpec& grid);

// Integral of K^2 over R^n; analytic for the Gaussian, midpoint quadrature
// otherwise.
double kernel_l2_integral(const KernelSpec& spec);
// Quadrature route kept separate so the analytic value can be checked
// against it.
double kernel_l2_integral_quadrature(const KernelSpec& spec, int points_per_axis = 4001);

// Observation noise scale kbar = (integral of K^2) / (N h^n).
double kbar(int n_agents, const KernelSpec& spec);

}  // namespace mfd
