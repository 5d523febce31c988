#include "icecsim/spline.hpp"

#include <algorithm>
#include <cmath>

namespace icec {

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const int n = static_cast<int>(x_.size());
    if (n < 3 || y_.size() != x_.size())
        throw std::invalid_argument("CubicSpline: need at least 3 matching knots");
    for (int i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("CubicSpline: x must increase strictly");

    // Thomas solve of the natural-spline tridiagonal system for m_
    m_.assign(n, 0.0);
    std::vector<double> c(n, 0.0), d(n, 0.0);
    for (int i = 1; i + 1 < n; ++i) {
        const double h0 = x_[i] - x_[i - 1];
        const double h1 = x_[i + 1] - x_[i];
        const double rhs = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
        double diag = 2.0 * (h0 + h1);
        double r = rhs;
        if (i > 1) {
            const double w = h0 / d[i - 1];
            diag -= w * h0;
            r -= w * c[i - 1];
        }
        d[i] = diag;
        c[i] = r;
    }
    for (int i = n - 2; i >= 1; --i) {
        double r = c[i];
        if (i + 1 < n - 1) r -= (x_[i + 1] - x_[i]) * m_[i + 1];
        m_[i] = r / d[i];
    }
}

int CubicSpline::segment(double x) const {
    const int n = static_cast<int>(x_.size());
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    int i = static_cast<int>(it - x_.begin()) - 1;
    return std::clamp(i, 0, n - 2);
}

double CubicSpline::operator()(double x) const {
    const int i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - x) / h;
    const double b = (x - x_[i]) / h;
    return a * y_[i] + b * y_[i + 1]
         + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::derivative(double x) const {
    const int i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - x) / h;
    const double b = (x - x_[i]) / h;
    return (y_[i + 1] - y_[i]) / h
         + ((3.0 * b * b - 1.0) * m_[i + 1] - (3.0 * a * a - 1.0) * m_[i]) * h / 6.0;
}

double CubicSpline::second_derivative(double x) const {
    const int i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - x) / h;
    const double b = (x - x_[i]) / h;
    return a * m_[i] + b * m_[i + 1];
}

} // namespace icec
