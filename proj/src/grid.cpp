#include "mfd/grid.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace mfd {

GridSpec GridSpec::make(double x_min, double x_max, double y_min, double y_max,
                        int nx, int ny) {
    if (nx < 3 || ny < 3) {
        throw ConfigError("grid: nx and ny must be >= 3, got nx=" +
                          std::to_string(nx) + " ny=" + std::to_string(ny));
    }
    if (!(x_max > x_min) || !(y_max > y_min)) {
        throw ConfigError("grid: degenerate domain bounds");
    }
    GridSpec g;
    g.x_min = x_min;
    g.x_max = x_max;
    g.y_min = y_min;
    g.y_max = y_max;
    g.nx = nx;
    g.ny = ny;
    g.dx = (x_max - x_min) / nx;
    g.dy = (y_max - y_min) / ny;
    return g;
}

Eigen::VectorXd GeneratorMatrix::column_sums() const {
    const int m = size();
    Eigen::VectorXd sums(m);
    for (int col = 0; col < m; ++col) {
        double off = 0.0;
        double diag = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(matrix, col); it; ++it) {
            if (it.row() == col) {
                diag = it.value();
            } else {
                off += it.value();
            }
        }
        sums[col] = off + diag;
    }
    return sums;
}

namespace {

// Minimum eigenvalue of a symmetric 2x2 matrix.
double min_eigenvalue_2x2(const Eigen::Matrix2d& s) {
    const double tr = s(0, 0) + s(1, 1);
    const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
    const double disc = std::sqrt(std::max(0.25 * tr * tr - det, 0.0));
    return 0.5 * tr - disc;
}

struct Triplets {
    std::vector<Eigen::Triplet<double>> list;
    void add(int row, int col, double v) { list.emplace_back(row, col, v); }
    // One face (or corner) coefficient entering two rows antisymmetrically.
    void add_pair(int row_minus, int row_plus, int col, double w) {
        list.emplace_back(row_minus, col, -w);
        list.emplace_back(row_plus, col, w);
    }
};

}  // namespace

GeneratorMatrix assemble_generator(const GridSpec& grid, const VelocitySampler& v,
                                   const DiffusionSampler& sigma_tensor, double t) {
    if (grid.nx < 3 || grid.ny < 3 || grid.dx <= 0.0 || grid.dy <= 0.0) {
        throw ConfigError("assemble_generator: degenerate grid");
    }
    const int nx = grid.nx;
    const int ny = grid.ny;
    const int m = grid.cells();
    const double dx = grid.dx;
    const double dy = grid.dy;

    // Sample the diffusion tensor at every cell center and check ellipticity.
    std::vector<Eigen::Matrix2d> sig(static_cast<std::size_t>(m));
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const Eigen::Matrix2d s = sigma_tensor(grid.cell_center(ix, iy), t);
            if (!s.allFinite() || min_eigenvalue_2x2(s) <= 0.0) {
                throw ConfigError(
                    "assemble_generator: diffusion tensor not positive definite "
                    "at cell (" + std::to_string(ix) + "," + std::to_string(iy) +
                    "), t=" + std::to_string(t));
            }
            sig[static_cast<std::size_t>(grid.index(ix, iy))] = s;
        }
    }

    Triplets trips;
    trips.list.reserve(static_cast<std::size_t>(10 * m));
    for (int c = 0; c < m; ++c) trips.add(c, c, 0.0);  // keep diagonal in pattern

    // Interior x-faces: flux F = v1*p (upwind) - d/dx (S11 p) (centered).
    // Row L gets -F/dx, row R gets +F/dx; for each column the same magnitude
    // enters both rows, so columns cancel exactly.
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix + 1 < nx; ++ix) {
            const int left = grid.index(ix, iy);
            const int right = grid.index(ix + 1, iy);
            const Eigen::Vector2d face(grid.x_min + (ix + 1) * dx, grid.cell_y(iy));
            const Eigen::Vector2d vel = v(face, t);
            if (!vel.allFinite()) {
                throw ConfigError("assemble_generator: non-finite velocity at x-face (" +
                                  std::to_string(ix) + "," + std::to_string(iy) + ")");
            }
            const double up = std::max(vel.x(), 0.0);
            const double dn = std::min(vel.x(), 0.0);
            const double s_l = sig[static_cast<std::size_t>(left)](0, 0);
            const double s_r = sig[static_cast<std::size_t>(right)](0, 0);
            // coefficient of p_left in F: up + s_l/dx; of p_right: dn - s_r/dx
            trips.add_pair(left, right, left, (up + s_l / dx) / dx);
            trips.add_pair(left, right, right, (dn - s_r / dx) / dx);
        }
    }

    // Interior y-faces.
    for (int iy = 0; iy + 1 < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const int south = grid.index(ix, iy);
            const int north = grid.index(ix, iy + 1);
            const Eigen::Vector2d face(grid.cell_x(ix), grid.y_min + (iy + 1) * dy);
            const Eigen::Vector2d vel = v(face, t);
            if (!vel.allFinite()) {
                throw ConfigError("assemble_generator: non-finite velocity at y-face (" +
                                  std::to_string(ix) + "," + std::to_string(iy) + ")");
            }
            const double up = std::max(vel.y(), 0.0);
            const double dn = std::min(vel.y(), 0.0);
            const double s_s = sig[static_cast<std::size_t>(south)](1, 1);
            const double s_n = sig[static_cast<std::size_t>(north)](1, 1);
            trips.add_pair(south, north, south, (up + s_s / dy) / dy);
            trips.add_pair(south, north, north, (dn - s_n / dy) / dy);
        }
    }

    // Mixed term: the flux through a face also carries the tangential
    // derivative of (S12 p), differenced between the two face corners. A
    // corner value is the mean of (S12 p) over its adjacent cells (four in
    // the interior, two when the corner lies on the boundary). Emitted as
    // separate antisymmetric triplets so constant tensors stay exactly
    // symmetric.
    bool any_cross = false;
    for (const Eigen::Matrix2d& s : sig) {
        if (s(0, 1) != 0.0) {
            any_cross = true;
            break;
        }
    }
    if (any_cross) {
        // Cells adjacent to the corner at (ix + 1/2, iy + 1/2); iy may be -1
        // or ny - 1 for boundary corners in the x-face sweep (and likewise
        // ix in the y-face sweep).
        auto corner_cells = [&](int ix, int iy, int (&cells)[4]) {
            int count = 0;
            for (int cy = iy; cy <= iy + 1; ++cy) {
                if (cy < 0 || cy >= ny) continue;
                for (int cx = ix; cx <= ix + 1; ++cx) {
                    if (cx < 0 || cx >= nx) continue;
                    cells[count++] = grid.index(cx, cy);
                }
            }
            return count;
        };
        for (int iy = 0; iy < ny; ++iy) {
            for (int ix = 0; ix + 1 < nx; ++ix) {
                const int left = grid.index(ix, iy);
                const int right = grid.index(ix + 1, iy);
                // F -= [u(corner up) - u(corner down)] / dy
                for (int side = 0; side < 2; ++side) {
                    const int corner_iy = side == 0 ? iy : iy - 1;
                    const double sign = side == 0 ? -1.0 : +1.0;
                    int cells[4];
                    const int count = corner_cells(ix, corner_iy, cells);
                    const double weight = sign / (count * dy);
                    for (int b = 0; b < count; ++b) {
                        const double s12 = sig[static_cast<std::size_t>(cells[b])](0, 1);
                        if (s12 == 0.0) continue;
                        trips.add_pair(left, right, cells[b], weight * s12 / dx);
                    }
                }
            }
        }
        for (int iy = 0; iy + 1 < ny; ++iy) {
            for (int ix = 0; ix < nx; ++ix) {
                const int south = grid.index(ix, iy);
                const int north = grid.index(ix, iy + 1);
                // F -= [u(corner east) - u(corner west)] / dx
                for (int side = 0; side < 2; ++side) {
                    const int corner_ix = side == 0 ? ix : ix - 1;
                    const double sign = side == 0 ? -1.0 : +1.0;
                    int cells[4];
                    const int count = corner_cells(corner_ix, iy, cells);
                    const double weight = sign / (count * dx);
                    for (int b = 0; b < count; ++b) {
                        const double s12 = sig[static_cast<std::size_t>(cells[b])](0, 1);
                        if (s12 == 0.0) continue;
                        trips.add_pair(south, north, cells[b], weight * s12 / dy);
                    }
                }
            }
        }
    }

    GeneratorMatrix gen;
    gen.matrix.resize(m, m);
    gen.matrix.setFromTriplets(trips.list.begin(), trips.list.end());
    gen.matrix.makeCompressed();

    // Replace each diagonal with minus the off-diagonal column sum taken in
    // storage order; column_sums() then cancels it bitwise.
    double max_diag = 0.0;
    for (int col = 0; col < m; ++col) {
        double off = 0.0;
        double* diag_ptr = nullptr;
        for (Eigen::SparseMatrix<double>::InnerIterator it(gen.matrix, col); it; ++it) {
            if (it.row() == col) {
                diag_ptr = &it.valueRef();
            } else {
                off += it.value();
            }
        }
        *diag_ptr = -off;
        max_diag = std::max(max_diag, std::abs(off));
    }
    gen.max_abs_diagonal = max_diag;
    if (!Eigen::Map<const Eigen::VectorXd>(gen.matrix.valuePtr(),
                                           gen.matrix.nonZeros())
             .allFinite()) {
        throw NumericalError("assemble_generator: non-finite entries");
    }
    return gen;
}

VectorField2 gradient(const ScalarField& f) {
    const GridSpec& g = f.grid;
    if (g.nx < 3 || g.ny < 3) throw ConfigError("gradient: invalid grid");
    VectorField2 out{ScalarField(g), ScalarField(g)};
    const double inv2dx = 1.0 / (2.0 * g.dx);
    const double invdx = 1.0 / g.dx;
    const double inv2dy = 1.0 / (2.0 * g.dy);
    const double invdy = 1.0 / g.dy;
    for (int iy = 0; iy < g.ny; ++iy) {
        for (int ix = 0; ix < g.nx; ++ix) {
            double gx;
            if (ix == 0) {
                gx = (f.at(1, iy) - f.at(0, iy)) * invdx;
            } else if (ix == g.nx - 1) {
                gx = (f.at(g.nx - 1, iy) - f.at(g.nx - 2, iy)) * invdx;
            } else {
                gx = (f.at(ix + 1, iy) - f.at(ix - 1, iy)) * inv2dx;
            }
            double gy;
            if (iy == 0) {
                gy = (f.at(ix, 1) - f.at(ix, 0)) * invdy;
            } else if (iy == g.ny - 1) {
                gy = (f.at(ix, g.ny - 1) - f.at(ix, g.ny - 2)) * invdy;
            } else {
                gy = (f.at(ix, iy + 1) - f.at(ix, iy - 1)) * inv2dy;
            }
            out.x.at(ix, iy) = gx;
            out.y.at(ix, iy) = gy;
        }
    }
    return out;
}

double mass(const ScalarField& f) { return f.values.sum() * f.grid.cell_area(); }

double l1_norm(const ScalarField& f) {
    return f.values.array().abs().sum() * f.grid.cell_area();
}

double l2_norm(const ScalarField& f) {
    return std::sqrt(f.values.squaredNorm() * f.grid.cell_area());
}

FieldNorms norms(const ScalarField& f) {
    FieldNorms n;
    n.l1 = l1_norm(f);
    n.l2 = l2_norm(f);
    const VectorField2 grad = gradient(f);
    n.h1 = n.l2 + l2_norm(grad.x) + l2_norm(grad.y);
    return n;
}

ScalarField uniform_density(const GridSpec& grid) {
    const double area = (grid.x_max - grid.x_min) * (grid.y_max - grid.y_min);
    ScalarField f(grid);
    f.values.setConstant(1.0 / area);
    return f;
}

}  // namespace mfd
