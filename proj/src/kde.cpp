#include "mfd/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

namespace mfd {

void KernelSpec::validate() const {
    if (!(h > 0.0)) throw ConfigError("kernel: bandwidth must be > 0");
    if (dim < 1 || dim > 2) throw ConfigError("kernel: dimension must be 1 or 2");
    if (!(cutoff_radii > 0.0)) throw ConfigError("kernel: cutoff must be > 0");
}

namespace {

// Kernel profile as a function of |u|^2 for a unit-bandwidth kernel.
double kernel_profile(KernelType kernel, int dim, double r2) {
    switch (kernel) {
        case KernelType::Gaussian:
            return std::pow(2.0 * std::numbers::pi, -0.5 * dim) * std::exp(-0.5 * r2);
        case KernelType::Epanechnikov: {
            if (r2 >= 1.0) return 0.0;
            // normalized on the unit ball: 2/pi in 2-D, 3/4 in 1-D
            const double c = dim == 2 ? 2.0 / std::numbers::pi : 0.75;
            return c * (1.0 - r2);
        }
    }
    return 0.0;
}

}  // namespace

ScalarField kernel_field_unnormalized(const Eigen::Vector2d& x_i,
                                      const KernelSpec& spec, const GridSpec& grid) {
    spec.validate();
    if (x_i.x() < grid.x_min || x_i.x() > grid.x_max || x_i.y() < grid.y_min ||
        x_i.y() > grid.y_max) {
        throw ConfigError("kernel_field: position outside the domain");
    }
    const double cutoff = spec.cutoff_radii * spec.h;
    const double cutoff2 = cutoff * cutoff;
    const double inv_h = 1.0 / spec.h;
    const double scale = std::pow(spec.h, -spec.dim);

    ScalarField f(grid);
    // Only cells inside the cutoff box can be nonzero.
    const int ix_lo = std::max(0, static_cast<int>(std::floor(
                                      (x_i.x() - cutoff - grid.x_min) / grid.dx)));
    const int ix_hi = std::min(grid.nx - 1, static_cast<int>(std::ceil(
                                                (x_i.x() + cutoff - grid.x_min) / grid.dx)));
    const int iy_lo = std::max(0, static_cast<int>(std::floor(
                                      (x_i.y() - cutoff - grid.y_min) / grid.dy)));
    const int iy_hi = std::min(grid.ny - 1, static_cast<int>(std::ceil(
                                                (x_i.y() + cutoff - grid.y_min) / grid.dy)));
    for (int iy = iy_lo; iy <= iy_hi; ++iy) {
        const double ry = grid.cell_y(iy) - x_i.y();
        for (int ix = ix_lo; ix <= ix_hi; ++ix) {
            const double rx = grid.cell_x(ix) - x_i.x();
            const double r2 = rx * rx + ry * ry;
            if (r2 > cutoff2) continue;
            f.at(ix, iy) =
                scale * kernel_profile(spec.kernel, spec.dim, r2 * inv_h * inv_h);
        }
    }
    return f;
}

ScalarField kernel_field(const Eigen::Vector2d& x_i, const KernelSpec& spec,
                         const GridSpec& grid) {
    ScalarField f = kernel_field_unnormalized(x_i, spec, grid);
    const double m = mass(f);
    if (!(m > 0.0)) {
        throw NumericalError("kernel_field: kernel mass vanished on the grid");
    }
    f.values /= m;
    return f;
}

ScalarField kde_estimate(const AgentEnsemble& ens, const KernelSpec& spec,
                         const GridSpec& grid) {
    const int n = ens.size();
    if (n < 1) throw ConfigError("kde_estimate: empty ensemble");

    // Canonical agent order: sort by position (ties by index). Equal
    // positions produce identical fields, so the sum is
    // permutation-invariant.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double ax = ens.positions(a, 0), bx = ens.positions(b, 0);
        if (ax != bx) return ax < bx;
        const double ay = ens.positions(a, 1), by = ens.positions(b, 1);
        if (ay != by) return ay < by;
        return a < b;
    });

    std::vector<Eigen::VectorXd> terms;
    terms.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const int i = order[static_cast<std::size_t>(k)];
        terms.push_back(
            kernel_field(ens.positions.row(i).transpose(), spec, grid).values);
    }
    // Pairwise reduction with a fixed tree.
    for (std::size_t width = 1; width < terms.size(); width *= 2) {
        for (std::size_t i = 0; i + width < terms.size(); i += 2 * width) {
            terms[i] += terms[i + width];
        }
    }
    ScalarField out(grid, terms.front() / static_cast<double>(n));
    return out;
}

double kernel_l2_integral(const KernelSpec& spec) {
    spec.validate();
    if (spec.kernel == KernelType::Gaussian) {
        return std::pow(4.0 * std::numbers::pi, -0.5 * spec.dim);
    }
    return kernel_l2_integral_quadrature(spec);
}

double kernel_l2_integral_quadrature(const KernelSpec& spec, int points_per_axis) {
    spec.validate();
    const double half_width =
        spec.kernel == KernelType::Epanechnikov ? 1.0 : spec.cutoff_radii + 4.0;
    const double step = 2.0 * half_width / points_per_axis;
    double total = 0.0;
    if (spec.dim == 1) {
        for (int i = 0; i < points_per_axis; ++i) {
            const double u = -half_width + (i + 0.5) * step;
            const double k = kernel_profile(spec.kernel, 1, u * u);
            total += k * k * step;
        }
        return total;
    }
    for (int i = 0; i < points_per_axis; ++i) {
        const double ux = -half_width + (i + 0.5) * step;
        double row = 0.0;
        for (int j = 0; j < points_per_axis; ++j) {
            const double uy = -half_width + (j + 0.5) * step;
            const double k = kernel_profile(spec.kernel, 2, ux * ux + uy * uy);
            row += k * k;
        }
        total += row * step * step;
    }
    return total;
}

double kbar(int n_agents, const KernelSpec& spec) {
    if (n_agents < 1) throw ConfigError("kbar: need at least one agent");
    return kernel_l2_integral(spec) /
           (static_cast<double>(n_agents) * std::pow(spec.h, spec.dim));
}

}  // namespace mfd
