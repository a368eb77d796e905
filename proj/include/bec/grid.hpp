#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>

#include <Eigen/Core>

#include "bec/errors.hpp"

namespace bec {

// Cell-centred uniform grid. Node (i, j) sits at origin + ((i+1/2)h, (j+1/2)h),
// so the covered rectangle has side lengths nx*h and ny*h.
struct Grid2D {
    int nx = 0;
    int ny = 0;
    double h = 0.0;
    double x0 = 0.0; // lower-left corner
    double y0 = 0.0;

    Grid2D() = default;
    Grid2D(int nx_, int ny_, double h_, double x0_, double y0_) : nx(nx_), ny(ny_), h(h_), x0(x0_), y0(y0_)
    {
        if (nx < 8 || ny < 8) throw domain_error("Grid2D: need at least 8 points per axis");
        if (!(h > 0.0)) throw domain_error("Grid2D: spacing must be positive");
    }

    // Square grid of n x n points covering [-half, half]^2.
    static Grid2D centered(int n, double half) { return Grid2D(n, n, 2.0 * half / n, -half, -half); }

    std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + static_cast<std::size_t>(i); }
    double x(int i) const { return x0 + (i + 0.5) * h; }
    double y(int j) const { return y0 + (j + 0.5) * h; }
    double cell_area() const { return h * h; }
    double area() const { return nx * h * ny * h; }

    bool operator==(const Grid2D& o) const
    {
        return nx == o.nx && ny == o.ny && h == o.h && x0 == o.x0 && y0 == o.y0;
    }
};

struct ScalarField {
    Grid2D grid;
    Eigen::ArrayXd v;

    ScalarField() = default;
    explicit ScalarField(const Grid2D& g, double value = 0.0) : grid(g), v(Eigen::ArrayXd::Constant(g.size(), value)) {}
    ScalarField(const Grid2D& g, Eigen::ArrayXd values) : grid(g), v(std::move(values))
    {
        if (static_cast<std::size_t>(v.size()) != g.size()) throw precondition_error("ScalarField: size mismatch");
    }

    static ScalarField from(const Grid2D& g, const std::function<double(double, double)>& f)
    {
        ScalarField s(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) s.v[static_cast<Eigen::Index>(g.index(i, j))] = f(g.x(i), g.y(j));
        return s;
    }

    double& operator()(int i, int j) { return v[static_cast<Eigen::Index>(grid.index(i, j))]; }
    double operator()(int i, int j) const { return v[static_cast<Eigen::Index>(grid.index(i, j))]; }
};

inline void require_same_grid(const ScalarField& a, const ScalarField& b, const char* who)
{
    if (!(a.grid == b.grid)) throw precondition_error(std::string(who) + ": fields live on different grids");
}

// h^2-weighted inner product and norm.
inline double inner(const ScalarField& a, const ScalarField& b)
{
    require_same_grid(a, b, "inner");
    return a.grid.cell_area() * (a.v * b.v).sum();
}

inline double norm(const ScalarField& a) { return std::sqrt(inner(a, a)); }

inline double integral(const ScalarField& a) { return a.grid.cell_area() * a.v.sum(); }

enum class Boundary {
    dirichlet, // zero ghost values one cell outside the grid
    neumann    // no flux through the grid boundary
};

// Sum over grid edges of w_e * (f_i - f_j)^2, w_e = weight_i * weight_j when a
// weight field is given. Dirichlet ghost edges use a ghost weight of 0.
inline double edge_sum(const ScalarField& f, Boundary bc, const ScalarField* weight = nullptr)
{
    const Grid2D& g = f.grid;
    double s = 0.0;
    auto wt = [&](std::size_t a, std::size_t b) {
        return weight ? weight->v[static_cast<Eigen::Index>(a)] * weight->v[static_cast<Eigen::Index>(b)] : 1.0;
    };
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            const double fk = f.v[static_cast<Eigen::Index>(k)];
            if (i + 1 < g.nx) {
                const std::size_t e = g.index(i + 1, j);
                const double d = f.v[static_cast<Eigen::Index>(e)] - fk;
                s += wt(k, e) * d * d;
            }
            if (j + 1 < g.ny) {
                const std::size_t e = g.index(i, j + 1);
                const double d = f.v[static_cast<Eigen::Index>(e)] - fk;
                s += wt(k, e) * d * d;
            }
        }
    }
    if (bc == Boundary::dirichlet && !weight) {
        for (int i = 0; i < g.nx; ++i) s += f(i, 0) * f(i, 0) + f(i, g.ny - 1) * f(i, g.ny - 1);
        for (int j = 0; j < g.ny; ++j) s += f(0, j) * f(0, j) + f(g.nx - 1, j) * f(g.nx - 1, j);
    }
    return s;
}

// Five-point -Laplacian matching edge_sum: the L2 gradient of edge_sum(f) is 2 * neg_laplacian(f).
inline ScalarField neg_laplacian(const ScalarField& f, Boundary bc)
{
    const Grid2D& g = f.grid;
    ScalarField out(g);
    const double ih2 = 1.0 / (g.h * g.h);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double c = f(i, j);
            double acc = 0.0;
            int nb = 0;
            if (i > 0) { acc += f(i - 1, j); ++nb; }
            if (i + 1 < g.nx) { acc += f(i + 1, j); ++nb; }
            if (j > 0) { acc += f(i, j - 1); ++nb; }
            if (j + 1 < g.ny) { acc += f(i, j + 1); ++nb; }
            const int deg = bc == Boundary::dirichlet ? 4 : nb;
            out(i, j) = (deg * c - acc) * ih2;
        }
    }
    return out;
}

} // namespace bec
