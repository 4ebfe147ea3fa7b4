// Ground-truth density propagation: explicit Euler on the discretized FPK
// equation, with the stability bound enforced.
#pragma once

#include <vector>

#include "mfd/grid.hpp"
#include "mfd/model.hpp"

namespace mfd {

struct ReferenceState {
    ScalarField p;
    double t = 0.0;
};

// p <- (I + dt*A) p. Throws NumericalError when dt exceeds the generator's
// stability bound.
ReferenceState reference_step(const ReferenceState& state, const GeneratorMatrix& a,
                              double dt);

// Number of equal Euler substeps needed to advance by dt within 0.9x the
// generator's stability bound. Throws when the generator is so stiff that
// the count exceeds 64.
int stable_substeps(const GeneratorMatrix& a, double dt);

// Advances by dt using stable_substeps() Euler substeps; mass-conserving and
// positivity-preserving per substep.
ReferenceState propagate_reference(const ReferenceState& state,
                                   const GeneratorMatrix& a, double dt);

// Forward run from p0, reassembling A each step for time-varying models.
// Snapshots are recorded every `snapshot_every` steps (and at the final
// step); snapshot_every <= 0 records only the initial and final states.
std::vector<ReferenceState> run_reference(const ScalarField& p0,
                                          const DriftDiffusionModel& model,
                                          double t_end, double dt,
                                          int snapshot_every = 50);

}  // namespace mfd
