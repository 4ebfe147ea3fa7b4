// Kalman-style density filters: diagonal observation covariance, matrix
// Riccati propagation, and the centralized/local update steps. The local
// step with theta = 0 runs the exact same arithmetic as the centralized one.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mfd/grid.hpp"

namespace mfd {

/// Diagonal observation covariance R = kbar * diag(y), clamped below.
struct DiagonalCovariance {
    Eigen::ArrayXd diag;  // entries >= floor > 0
    double floor = 0.0;

    Eigen::ArrayXd inverse() const { return diag.inverse(); }
};

DiagonalCovariance make_diag_cov(const ScalarField& y, double kbar_value,
                                 double floor);

/// Dense symmetric Riccati state P. Kept exactly symmetric by construction
/// (lower triangle computed, mirrored); P*1 = 0 is preserved by the update
/// and tracked as a residual.
struct Covariance {
    Eigen::MatrixXd p;

    int size() const { return static_cast<int>(p.rows()); }
    double norm() const { return p.cwiseAbs().maxCoeff(); }
    double symmetry_residual() const { return (p - p.transpose()).cwiseAbs().maxCoeff(); }
    double ones_residual() const { return p.rowwise().sum().cwiseAbs().maxCoeff(); }
    double min_eigenvalue() const;  // diagnostic; O(M^3)
};

// scale * (I - 11^T/M): positive semidefinite with P*1 = 0 exactly.
Covariance initial_covariance(int m, double scale);

// One step of dP/dt = A P + P A^T - P Rinv P in the factored form
// (I + dt A)(P - dt P Rinv P)(I + dt A)^T: first-order equivalent to the
// plain Euler update but positive semidefinite by construction when
// dt * lambda(P Rinv) <= 1, and exactly symmetrized. Throws NumericalError
// when the gain stiffness bound dt * ||P||_inf * max(Rinv) exceeds 2 (the
// covariance floor is too small) or the symmetry residual exceeds
// 1e-6 * ||P||.
void riccati_step(Covariance& cov, const GeneratorMatrix& a,
                  const Eigen::ArrayXd& r_inv, double dt);

struct CentralFilterState {
    ScalarField p_hat;
    Covariance cov;
    double t = 0.0;
};

struct LocalFilterState {
    ScalarField p_hat;
    Covariance cov;
    int agent = 0;
    double t = 0.0;
};

// p_hat <- (I + dt A) p_hat + dt P Rinv (y - p_hat); then riccati_step.
// Throws NumericalError if the mass of p_hat drifts by more than 1e-6 in
// one step.
void central_filter_step(CentralFilterState& state, const GeneratorMatrix& a,
                         const ScalarField& y, const DiagonalCovariance& r,
                         double dt);

// Local filter with optional theta-coupling through neighbor estimates:
// adds dt * theta * P_i * sum_j (p_hat_j - p_hat_i) before the Riccati step.
// With theta = 0 (or no neighbors) this is bitwise the centralized update.
void local_filter_step(LocalFilterState& state, const GeneratorMatrix& a,
                       const ScalarField& y_i, const DiagonalCovariance& r_i,
                       const std::vector<const ScalarField*>& neighbor_estimates,
                       double theta, double dt);

// Advance by dt through stable Euler substeps with the observation held
// fixed, so stiff generators stay within the stability bound at the
// configured cadence.
void central_filter_advance(CentralFilterState& state, const GeneratorMatrix& a,
                            const ScalarField& y, const DiagonalCovariance& r,
                            double dt);
void local_filter_advance(LocalFilterState& state, const GeneratorMatrix& a,
                          const ScalarField& y_i, const DiagonalCovariance& r_i,
                          const std::vector<const ScalarField*>& neighbor_estimates,
                          double theta, double dt);

}  // namespace mfd
