// Uniform cell-centered grid on a rectangle, scalar/vector fields sampled on
// it, and the conservative finite-volume discretization of the
// Fokker-Planck generator with a zero-flux boundary.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <limits>

#include "mfd/errors.hpp"

namespace mfd {

struct GridSpec {
    double x_min = 0.0, x_max = 1.0;
    double y_min = 0.0, y_max = 1.0;
    int nx = 0, ny = 0;
    double dx = 0.0, dy = 0.0;

    static GridSpec make(double x_min, double x_max, double y_min, double y_max,
                         int nx, int ny);
    static GridSpec unit_square(int nx, int ny) {
        return make(0.0, 1.0, 0.0, 1.0, nx, ny);
    }

    int cells() const { return nx * ny; }
    // Row-major: y-major rows of x-cells.
    int index(int ix, int iy) const { return iy * nx + ix; }
    double cell_x(int ix) const { return x_min + (ix + 0.5) * dx; }
    double cell_y(int iy) const { return y_min + (iy + 0.5) * dy; }
    Eigen::Vector2d cell_center(int ix, int iy) const {
        return {cell_x(ix), cell_y(iy)};
    }
    double cell_area() const { return dx * dy; }

    bool operator==(const GridSpec&) const = default;
};

struct ScalarField {
    GridSpec grid;
    Eigen::VectorXd values;  // size grid.cells(), row-major

    ScalarField() = default;
    explicit ScalarField(const GridSpec& g)
        : grid(g), values(Eigen::VectorXd::Zero(g.cells())) {}
    ScalarField(const GridSpec& g, Eigen::VectorXd v)
        : grid(g), values(std::move(v)) {}

    double& at(int ix, int iy) { return values[grid.index(ix, iy)]; }
    double at(int ix, int iy) const { return values[grid.index(ix, iy)]; }
    bool finite() const { return values.allFinite(); }
};

struct VectorField2 {
    ScalarField x;
    ScalarField y;
};

struct FieldNorms {
    double l1 = 0.0;
    double l2 = 0.0;
    double h1 = 0.0;
};

/// Sparse discretization of the FPK operator A(t). Column sums are exactly
/// zero: the diagonal of each column is assembled as minus the sum of its
/// off-diagonal entries, in storage order, which is the discrete zero-flux
/// mass-conservation identity.
struct GeneratorMatrix {
    Eigen::SparseMatrix<double> matrix;  // M x M, compressed column-major
    double max_abs_diagonal = 0.0;

    int size() const { return static_cast<int>(matrix.rows()); }
    // Largest explicit-Euler step that keeps (I + dt*A) nonnegative for
    // M-matrix structure (also the Gershgorin stability bound).
    double max_stable_dt() const {
        return max_abs_diagonal > 0.0
                   ? 1.0 / max_abs_diagonal
                   : std::numeric_limits<double>::infinity();
    }
    // Per-column sums, accumulated off-diagonals first (storage order) and
    // the diagonal last; exactly zero for conservatively assembled matrices.
    Eigen::VectorXd column_sums() const;
};

using VelocitySampler = std::function<Eigen::Vector2d(const Eigen::Vector2d&, double)>;
using DiffusionSampler = std::function<Eigen::Matrix2d(const Eigen::Vector2d&, double)>;

/// Finite-volume assembly of A p = -sum_j d_j(v_j p) + sum_jk d_j d_k(S_jk p)
/// with zero total flux through the boundary. Diffusive fluxes use centered
/// differences of (S p) at faces, advective fluxes first-order upwinding on
/// the face-sampled velocity, mixed terms the 4-point cross stencil on
/// corner-interpolated values.
GeneratorMatrix assemble_generator(const GridSpec& grid, const VelocitySampler& v,
                                   const DiffusionSampler& sigma_tensor, double t);

VectorField2 gradient(const ScalarField& f);

// Midpoint-quadrature integral of the field over the domain.
double mass(const ScalarField& f);

double l1_norm(const ScalarField& f);
double l2_norm(const ScalarField& f);

// l1, l2 and H1 = l2 + sum_j ||d_j f||_{L2} with the same quadrature.
FieldNorms norms(const ScalarField& f);

// Constant field with grid mass exactly one up to quadrature rounding.
ScalarField uniform_density(const GridSpec& grid);

}  // namespace mfd
