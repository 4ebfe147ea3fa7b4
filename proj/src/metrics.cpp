#include "mfd/metrics.hpp"

#include <cmath>

namespace mfd {

MetricsRecord compute_metrics(const ScalarField& estimate, const ScalarField& truth) {
    if (estimate.grid != truth.grid) {
        throw ConfigError("compute_metrics: fields live on different grids");
    }
    MetricsRecord rec;
    const ScalarField diff(estimate.grid, estimate.values - truth.values);
    rec.l2_err = l2_norm(diff);
    const VectorField2 grad_diff = gradient(diff);
    rec.grad_l2_err = std::sqrt((grad_diff.x.values.squaredNorm() +
                                 grad_diff.y.values.squaredNorm()) *
                                estimate.grid.cell_area());
    rec.h1_err = rec.l2_err + rec.grad_l2_err;
    rec.mass_dev = std::abs(mass(estimate) - 1.0);
    rec.min_val = estimate.values.minCoeff();
    return rec;
}

double input_variation(const std::vector<ScalarField>& z_now,
                       const std::vector<ScalarField>& z_prev, double dt) {
    if (z_now.empty() || z_now.size() != z_prev.size()) {
        throw ConfigError("input_variation: need matching snapshots");
    }
    if (!(dt > 0.0)) throw ConfigError("input_variation: dt must be > 0");
    const std::size_t n = z_now.size();
    const Eigen::Index m = z_now.front().values.size();

    Eigen::VectorXd mean_rate = Eigen::VectorXd::Zero(m);
    std::vector<Eigen::VectorXd> rates;
    rates.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        rates.push_back((z_now[i].values - z_prev[i].values) / dt);
        mean_rate += rates.back();
    }
    mean_rate /= static_cast<double>(n);

    const double area = z_now.front().grid.cell_area();
    double total = 0.0;
    for (const Eigen::VectorXd& rate : rates) {
        total += (rate - mean_rate).squaredNorm() * area;
    }
    return std::sqrt(total);
}

double time_average(const std::vector<double>& series, double from_fraction) {
    if (series.empty()) return 0.0;
    const auto start = static_cast<std::size_t>(
        from_fraction * static_cast<double>(series.size()));
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = start; i < series.size(); ++i) {
        sum += series[i];
        ++count;
    }
    return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

}  // namespace mfd
