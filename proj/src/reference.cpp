#include "mfd/reference.hpp"

#include <cmath>
#include <string>

namespace mfd {

ReferenceState reference_step(const ReferenceState& state, const GeneratorMatrix& a,
                              double dt) {
    if (!(dt > 0.0)) throw ConfigError("reference_step: dt must be > 0");
    const double dt_max = a.max_stable_dt();
    if (dt > dt_max) {
        throw NumericalError("reference_step: dt=" + std::to_string(dt) +
                             " exceeds the stability bound dt_max=" +
                             std::to_string(dt_max));
    }
    ReferenceState next;
    next.p = ScalarField(state.p.grid,
                         state.p.values + dt * (a.matrix * state.p.values));
    next.t = state.t + dt;
    return next;
}

int stable_substeps(const GeneratorMatrix& a, double dt) {
    if (!(dt > 0.0)) throw ConfigError("stable_substeps: dt must be > 0");
    const double dt_max = a.max_stable_dt();
    if (dt <= 0.9 * dt_max) return 1;
    const double needed = dt / (0.9 * dt_max);
    if (needed > 64.0) {
        throw NumericalError("stable_substeps: dt=" + std::to_string(dt) +
                             " needs more than 64 substeps (dt_max=" +
                             std::to_string(dt_max) + ")");
    }
    return static_cast<int>(std::ceil(needed));
}

ReferenceState propagate_reference(const ReferenceState& state,
                                   const GeneratorMatrix& a, double dt) {
    const int n = stable_substeps(a, dt);
    const double sub_dt = dt / n;
    ReferenceState out = state;
    for (int k = 0; k < n; ++k) out = reference_step(out, a, sub_dt);
    out.t = state.t + dt;
    return out;
}

std::vector<ReferenceState> run_reference(const ScalarField& p0,
                                          const DriftDiffusionModel& model,
                                          double t_end, double dt,
                                          int snapshot_every) {
    if (!(dt > 0.0)) throw ConfigError("run_reference: dt must be > 0");
    std::vector<ReferenceState> snapshots;
    ReferenceState state{p0, 0.0};
    snapshots.push_back(state);
    if (t_end <= 0.0) return snapshots;

    const int steps = static_cast<int>(std::llround(t_end / dt));
    GeneratorMatrix a = assemble_generator(p0.grid, model.drift, model.diffusion, 0.0);
    for (int k = 0; k < steps; ++k) {
        const double t = k * dt;
        if (!model.autonomous && k > 0) {
            a = assemble_generator(p0.grid, model.drift, model.diffusion, t);
        }
        state = propagate_reference(state, a, dt);
        state.t = (k + 1) * dt;
        const bool last = k + 1 == steps;
        if (last || (snapshot_every > 0 && (k + 1) % snapshot_every == 0)) {
            snapshots.push_back(state);
        }
    }
    return snapshots;
}

}  // namespace mfd
