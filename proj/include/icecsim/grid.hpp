#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace icec {

enum class Boundary { dirichlet, periodic };

// Uniform 1D coordinate grid with quadrature weights.
//
// dirichlet: n points including both endpoints, spacing (max-min)/(n-1),
//            trapezoid weights (h/2 at the ends). Wave functions on such a
//            grid vanish at the first and last point.
// periodic:  n points starting at min, spacing (max-min)/n, the right
//            endpoint is the wrap-around image of the left one and is not
//            stored. Uniform weights h.
// Either way the weights sum to the domain length.
struct Grid1D {
    int n = 0;
    double xmin = 0.0;
    double xmax = 0.0;
    Boundary boundary = Boundary::dirichlet;
    double spacing = 0.0;
    std::vector<double> points;
    std::vector<double> weights;

    static Grid1D dirichlet(double xmin, double xmax, int n);
    static Grid1D periodic(double xmin, double xmax, int n);

    double length() const { return xmax - xmin; }
    // Finest resolvable wavenumber of the grid's spectral basis.
    double k_max() const;
    bool same_as(const Grid1D& o) const;
};

// Tensor grid for psi(z_e1, z_e2, R): both electronic axes share one grid
// definition, the nuclear axis has its own. Storage order is z_e1 slowest,
// z_e2 middle, R fastest (C order).
struct Grid3D {
    Grid1D electronic; // shared by z_e1 and z_e2
    Grid1D nuclear;    // R axis, strictly positive domain

    Grid3D() = default;
    Grid3D(Grid1D e, Grid1D r);

    std::int64_t total_points() const {
        return static_cast<std::int64_t>(electronic.n) * electronic.n * nuclear.n;
    }
    std::int64_t index(int i1, int i2, int ir) const {
        return (static_cast<std::int64_t>(i1) * electronic.n + i2) * nuclear.n + ir;
    }
};

} // namespace icec
