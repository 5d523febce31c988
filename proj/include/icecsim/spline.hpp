#pragma once

#include <stdexcept>
#include <vector>

namespace icec {

// Natural cubic spline through (x_i, y_i) with strictly increasing x.
// Evaluation outside the knot range extrapolates with the boundary cubic.
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;
    double derivative(double x) const;
    double second_derivative(double x) const;

private:
    std::vector<double> x_, y_, m_; // m_ = second derivatives at knots
    int segment(double x) const;
};

} // namespace icec
