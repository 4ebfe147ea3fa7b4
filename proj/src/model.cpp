#include "mfd/model.hpp"

#include <cmath>
#include <numbers>

namespace mfd {

void MixtureSpec::validate() const {
    if (means.empty() || weights.size() != static_cast<Eigen::Index>(means.size())) {
        throw ConfigError("mixture: component count mismatch");
    }
    if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-12) {
        throw ConfigError("mixture: weights must be a probability vector");
    }
    const double det =
        covariance(0, 0) * covariance(1, 1) - covariance(0, 1) * covariance(1, 0);
    if (covariance(0, 0) <= 0.0 || det <= 0.0 ||
        std::abs(covariance(0, 1) - covariance(1, 0)) > 1e-14) {
        throw ConfigError("mixture: covariance must be symmetric positive definite");
    }
}

MixtureSpec spinning_mixture_spec(double angular_rate) {
    MixtureSpec spec;
    const double w = angular_rate;
    spec.means.push_back([w](double t) {
        return Eigen::Vector2d(0.5 + 0.3 * std::cos(w * t), 0.5 + 0.3 * std::sin(w * t));
    });
    spec.means.push_back([w](double t) {
        return Eigen::Vector2d(0.5 + 0.3 * std::cos(w * t + std::numbers::pi),
                               0.5 + 0.3 * std::sin(w * t + std::numbers::pi));
    });
    spec.covariance = Eigen::Vector2d(0.02, 0.02).asDiagonal();
    spec.weights = Eigen::Vector2d(0.5, 0.5);
    return spec;
}

namespace {

struct MixtureEval {
    double value;
    Eigen::Vector2d gradient;
};

MixtureEval evaluate_mixture(const MixtureSpec& spec, const Eigen::Vector2d& x,
                             double t) {
    const Eigen::Matrix2d inv_cov = spec.covariance.inverse();
    const double det =
        spec.covariance(0, 0) * spec.covariance(1, 1) -
        spec.covariance(0, 1) * spec.covariance(1, 0);
    const double norm_const = 1.0 / (2.0 * std::numbers::pi * std::sqrt(det));
    MixtureEval out{0.0, Eigen::Vector2d::Zero()};
    for (std::size_t k = 0; k < spec.means.size(); ++k) {
        const Eigen::Vector2d d = x - spec.means[k](t);
        const Eigen::Vector2d id = inv_cov * d;
        const double component =
            spec.weights[static_cast<Eigen::Index>(k)] * norm_const *
            std::exp(-0.5 * d.dot(id));
        out.value += component;
        out.gradient -= component * id;
    }
    return out;
}

}  // namespace

double mixture_value(const MixtureSpec& spec, const Eigen::Vector2d& x, double t) {
    return evaluate_mixture(spec, x, t).value;
}

Eigen::Vector2d mixture_gradient(const MixtureSpec& spec, const Eigen::Vector2d& x,
                                 double t) {
    return evaluate_mixture(spec, x, t).gradient;
}

ScalarField mixture_density(const MixtureSpec& spec, const GridSpec& grid, double t) {
    spec.validate();
    ScalarField f(grid);
    for (int iy = 0; iy < grid.ny; ++iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            f.at(ix, iy) = mixture_value(spec, grid.cell_center(ix, iy), t);
        }
    }
    return f;
}

DriftDiffusionModel scenario_model(const MixtureSpec& spec, double noise_level) {
    spec.validate();
    if (noise_level <= 0.0) throw ConfigError("scenario_model: noise level must be > 0");
    const double d = noise_level;
    DriftDiffusionModel model;
    model.drift = [spec, d](const Eigen::Vector2d& x, double t) {
        const MixtureEval e = evaluate_mixture(spec, x, t);
        if (!(e.value > 0.0)) {
            throw NumericalError("scenario_model: mixture density not positive");
        }
        return Eigen::Vector2d(d / e.value * e.gradient);
    };
    model.noise = [d](const Eigen::Vector2d&, double) {
        return Eigen::Matrix2d(d * Eigen::Matrix2d::Identity());
    };
    model.diffusion = [d](const Eigen::Vector2d&, double) {
        return Eigen::Matrix2d(0.5 * d * d * Eigen::Matrix2d::Identity());
    };
    model.autonomous = false;
    return model;
}

DriftDiffusionModel pure_diffusion_model(double noise_level) {
    if (noise_level <= 0.0) throw ConfigError("pure_diffusion_model: noise level must be > 0");
    const double d = noise_level;
    DriftDiffusionModel model;
    model.drift = [](const Eigen::Vector2d&, double) { return Eigen::Vector2d::Zero().eval(); };
    model.noise = [d](const Eigen::Vector2d&, double) {
        return Eigen::Matrix2d(d * Eigen::Matrix2d::Identity());
    };
    model.diffusion = [d](const Eigen::Vector2d&, double) {
        return Eigen::Matrix2d(0.5 * d * d * Eigen::Matrix2d::Identity());
    };
    model.autonomous = true;
    return model;
}

DriftDiffusionModel constant_drift_model(const Eigen::Vector2d& velocity,
                                         double noise_level) {
    DriftDiffusionModel model = pure_diffusion_model(noise_level);
    model.drift = [velocity](const Eigen::Vector2d&, double) { return velocity; };
    return model;
}

void validate_ellipticity(const DriftDiffusionModel& model, const GridSpec& grid,
                          double t) {
    for (int iy = 0; iy < grid.ny; ++iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            const Eigen::Matrix2d s = model.diffusion(grid.cell_center(ix, iy), t);
            const double tr = s(0, 0) + s(1, 1);
            const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
            const double min_eig =
                0.5 * tr - std::sqrt(std::max(0.25 * tr * tr - det, 0.0));
            if (!(min_eig > 0.0)) {
                throw ConfigError("model: diffusion tensor not positive definite at cell (" +
                                  std::to_string(ix) + "," + std::to_string(iy) + ")");
            }
        }
    }
}

}  // namespace mfd
