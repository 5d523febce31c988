#include "icecsim/grid.hpp"

#include <cmath>

namespace icec {

Grid1D Grid1D::dirichlet(double xmin, double xmax, int n) {
    if (n < 8) throw std::invalid_argument("Grid1D: need at least 8 points");
    if (!(xmax > xmin)) throw std::invalid_argument("Grid1D: xmax must exceed xmin");
    Grid1D g;
    g.n = n;
    g.xmin = xmin;
    g.xmax = xmax;
    g.boundary = Boundary::dirichlet;
    g.spacing = (xmax - xmin) / (n - 1);
    g.points.resize(n);
    g.weights.assign(n, g.spacing);
    for (int i = 0; i < n; ++i) g.points[i] = xmin + i * g.spacing;
    g.points.back() = xmax;
    g.weights.front() = 0.5 * g.spacing;
    g.weights.back() = 0.5 * g.spacing;
    return g;
}

Grid1D Grid1D::periodic(double xmin, double xmax, int n) {
    if (n < 8) throw std::invalid_argument("Grid1D: need at least 8 points");
    if (!(xmax > xmin)) throw std::invalid_argument("Grid1D: xmax must exceed xmin");
    Grid1D g;
    g.n = n;
    g.xmin = xmin;
    g.xmax = xmax;
    g.boundary = Boundary::periodic;
    g.spacing = (xmax - xmin) / n;
    g.points.resize(n);
    g.weights.assign(n, g.spacing);
    for (int i = 0; i < n; ++i) g.points[i] = xmin + i * g.spacing;
    return g;
}

double Grid1D::k_max() const {
    const double pi = 3.14159265358979323846;
    return pi / spacing;
}

bool Grid1D::same_as(const Grid1D& o) const {
    return n == o.n && xmin == o.xmin && xmax == o.xmax && boundary == o.boundary;
}

Grid3D::Grid3D(Grid1D e, Grid1D r) : electronic(std::move(e)), nuclear(std::move(r)) {
    if (nuclear.xmin < 0.0)
        throw std::invalid_argument("Grid3D: nuclear axis must have a nonnegative domain");
}

} // namespace icec
