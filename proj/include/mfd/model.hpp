// Drift/diffusion models driving both the agents and the generator,
// including the spinning two-component Gaussian mixture scenario.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "mfd/grid.hpp"

namespace mfd {

struct MixtureSpec {
    std::vector<std::function<Eigen::Vector2d(double)>> means;  // per component
    Eigen::Matrix2d covariance = Eigen::Matrix2d::Identity();   // shared, SPD
    Eigen::VectorXd weights;                                    // probability vector

    void validate() const;
};

// Two components rotating on a radius-0.3 circle about the domain center,
// antipodal phases, shared covariance diag(0.02, 0.02).
MixtureSpec spinning_mixture_spec(double angular_rate = 0.04);

// Mixture density at a point (not renormalized on the bounded domain).
double mixture_value(const MixtureSpec& spec, const Eigen::Vector2d& x, double t);
// Analytic spatial gradient of the mixture density.
Eigen::Vector2d mixture_gradient(const MixtureSpec& spec, const Eigen::Vector2d& x,
                                 double t);

// Cell-centered samples of the analytic mixture; mass < 1 by tail truncation.
ScalarField mixture_density(const MixtureSpec& spec, const GridSpec& grid, double t);

struct DriftDiffusionModel {
    VelocitySampler drift;
    std::function<Eigen::Matrix2d(const Eigen::Vector2d&, double)> noise;  // sigma
    DiffusionSampler diffusion;  // Sigma = sigma sigma^T / 2
    bool autonomous = false;     // true: generator does not depend on t
};

// Drift v = D grad(f)/f toward the mixture f, isotropic noise sigma = D*I.
DriftDiffusionModel scenario_model(const MixtureSpec& spec, double noise_level);

DriftDiffusionModel pure_diffusion_model(double noise_level);
DriftDiffusionModel constant_drift_model(const Eigen::Vector2d& velocity,
                                         double noise_level);

// Checks the diffusion tensor is positive definite on every cell center.
void validate_ellipticity(const DriftDiffusionModel& model, const GridSpec& grid,
                          double t);

}  // namespace mfd
