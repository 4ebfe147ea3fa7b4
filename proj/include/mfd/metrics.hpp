// Error metrics between estimated and reference densities.
#pragma once

#include <vector>

#include "mfd/grid.hpp"

namespace mfd {

struct MetricsRecord {
    double t = 0.0;
    double l2_err = 0.0;
    double grad_l2_err = 0.0;  // vector L2 norm of the gradient error
    double h1_err = 0.0;       // l2_err + grad_l2_err
    double mass_dev = 0.0;     // |mass(estimate) - 1|
    double min_val = 0.0;
    double consensus_track_err = 0.0;  // max_i ||y_i - y||_{L2}
    double input_variation = 0.0;      // ||Pi z_dot|| surrogate
    bool connected = true;
};

// Both gradients use the same discrete operator, so the metric isolates
// estimation error from discretization error.
MetricsRecord compute_metrics(const ScalarField& estimate, const ScalarField& truth);

// Finite-difference z_dot per agent, agent-mean removed, root-sum of squared
// L2 norms.
double input_variation(const std::vector<ScalarField>& z_now,
                       const std::vector<ScalarField>& z_prev, double dt);

// Mean of a per-step series over the final (1 - from_fraction) part of the
// run, e.g. from_fraction = 0.5 for the last half horizon.
double time_average(const std::vector<double>& series, double from_fraction);

}  // namespace mfd
