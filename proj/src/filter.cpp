#include "mfd/filter.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfd/reference.hpp"

namespace mfd {

namespace {

// Copies the strict lower triangle into the upper one, cache-blocked; the
// plain triangularView assignment from the transpose is several times
// slower at these sizes.
void mirror_lower_to_upper(Eigen::MatrixXd& m) {
    const int n = static_cast<int>(m.rows());
    constexpr int block = 64;
    for (int jb = 0; jb < n; jb += block) {
        const int j_end = std::min(jb + block, n);
        for (int ib = jb; ib < n; ib += block) {
            const int i_end = std::min(ib + block, n);
            for (int j = jb; j < j_end; ++j) {
                for (int i = std::max(ib, j + 1); i < i_end; ++i) {
                    m(j, i) = m(i, j);
                }
            }
        }
    }
}

}  // namespace

DiagonalCovariance make_diag_cov(const ScalarField& y, double kbar_value,
                                 double floor) {
    if (!(kbar_value > 0.0)) throw ConfigError("make_diag_cov: kbar must be > 0");
    if (!(floor > 0.0)) throw ConfigError("make_diag_cov: floor must be > 0");
    DiagonalCovariance r;
    r.floor = floor;
    r.diag = (kbar_value * y.values.array()).max(floor);
    return r;
}

double Covariance::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        p, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

Covariance initial_covariance(int m, double scale) {
    if (m < 1) throw ConfigError("initial_covariance: empty grid");
    Covariance cov;
    cov.p = Eigen::MatrixXd::Constant(m, m, -scale / m);
    cov.p.diagonal().array() += scale;
    return cov;
}

void riccati_step(Covariance& cov, const GeneratorMatrix& a,
                  const Eigen::ArrayXd& r_inv, double dt) {
    const int m = cov.size();
    if (a.size() != m || r_inv.size() != m) {
        throw ConfigError("riccati_step: dimension mismatch");
    }
    // Gain stiffness guard: the damping factor (I - dt P Rinv) must stay a
    // contraction or the update (and the filter feeding on P) diverges.
    // lambda_max(P Rinv) <= ||P Rinv||_1 pairs each cell's Rinv with its own
    // column mass, which stays sharp when Rinv is large only where P is
    // small.
    const double stiffness =
        dt *
        (cov.p.cwiseAbs().colwise().sum().array() * r_inv.transpose()).maxCoeff();
    if (stiffness > 2.5) {
        throw NumericalError(
            "riccati_step: dt*lambda(P Rinv) bound " + std::to_string(stiffness) +
            " > 2.5; the observation-covariance floor is too small for this step");
    }

    // Factored update (I + dt A)(P - dt P Rinv P)(I + dt A)^T: first-order
    // equivalent to the Euler step of dP/dt = AP + PA^T - P Rinv P, but the
    // congruence keeps P positive semidefinite and A's exact zero column
    // sums keep P*1 = 0 through the right factor. The quadratic term is a
    // mirrored rank update, so P stays symmetric bit for bit.
    const Eigen::MatrixXd scaled = cov.p * r_inv.sqrt().matrix().asDiagonal();
    cov.p.selfadjointView<Eigen::Lower>().rankUpdate(scaled, -dt);
    mirror_lower_to_upper(cov.p);

    Eigen::MatrixXd half = cov.p + dt * (a.matrix * cov.p);
    Eigen::MatrixXd next = half + dt * (half * a.matrix.transpose());
    mirror_lower_to_upper(next);
    cov.p = std::move(next);

    const double residual = cov.symmetry_residual();
    if (residual > 1e-6 * cov.norm()) {
        throw NumericalError("riccati_step: symmetry residual " +
                             std::to_string(residual) + " exceeds tolerance");
    }
}

namespace {

// Shared innovation update; the coupling term is added only when present so
// the theta = 0 path is identical to the centralized filter.
void filter_core_step(ScalarField& p_hat, Covariance& cov, const GeneratorMatrix& a,
                      const ScalarField& y, const DiagonalCovariance& r, double dt,
                      const Eigen::VectorXd* coupling, double theta) {
    if (y.grid != p_hat.grid) throw ConfigError("filter step: grid mismatch");
    const double mass_before = mass(p_hat);

    const Eigen::ArrayXd r_inv = r.inverse();
    const Eigen::VectorXd weighted_innovation =
        (r_inv * (y.values - p_hat.values).array()).matrix();
    Eigen::VectorXd next = p_hat.values + dt * (a.matrix * p_hat.values) +
                           dt * (cov.p * weighted_innovation);
    if (coupling != nullptr) {
        next += (dt * theta) * (cov.p * (*coupling));
    }
    p_hat.values = std::move(next);

    const double drift = std::abs(mass(p_hat) - mass_before);
    if (drift > 1e-6) {
        throw NumericalError("filter step: mass drifted by " + std::to_string(drift) +
                             " in one step");
    }
    riccati_step(cov, a, r_inv, dt);
}

}  // namespace

void central_filter_step(CentralFilterState& state, const GeneratorMatrix& a,
                         const ScalarField& y, const DiagonalCovariance& r,
                         double dt) {
    filter_core_step(state.p_hat, state.cov, a, y, r, dt, nullptr, 0.0);
    state.t += dt;
}

void local_filter_step(LocalFilterState& state, const GeneratorMatrix& a,
                       const ScalarField& y_i, const DiagonalCovariance& r_i,
                       const std::vector<const ScalarField*>& neighbor_estimates,
                       double theta, double dt) {
    if (theta > 0.0 && !neighbor_estimates.empty()) {
        Eigen::VectorXd disagreement =
            Eigen::VectorXd::Zero(state.p_hat.values.size());
        for (const ScalarField* neighbor : neighbor_estimates) {
            disagreement += neighbor->values - state.p_hat.values;
        }
        filter_core_step(state.p_hat, state.cov, a, y_i, r_i, dt, &disagreement,
                         theta);
    } else {
        filter_core_step(state.p_hat, state.cov, a, y_i, r_i, dt, nullptr, 0.0);
    }
    state.t += dt;
}

void central_filter_advance(CentralFilterState& state, const GeneratorMatrix& a,
                            const ScalarField& y, const DiagonalCovariance& r,
                            double dt) {
    const int n = stable_substeps(a, dt);
    const double sub_dt = dt / n;
    for (int k = 0; k < n; ++k) central_filter_step(state, a, y, r, sub_dt);
}

void local_filter_advance(LocalFilterState& state, const GeneratorMatrix& a,
                          const ScalarField& y_i, const DiagonalCovariance& r_i,
                          const std::vector<const ScalarField*>& neighbor_estimates,
                          double theta, double dt) {
    const int n = stable_substeps(a, dt);
    const double sub_dt = dt / n;
    for (int k = 0; k < n; ++k) {
        local_filter_step(state, a, y_i, r_i, neighbor_estimates, theta, sub_dt);
    }
}

}  // namespace mfd
