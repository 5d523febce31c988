#pragma once

#include <Eigen/Dense>

namespace icec {

// Symmetric tridiagonal matrix, stored as main diagonal + one off-diagonal.
struct SymTridiag {
    Eigen::VectorXd diag;
    Eigen::VectorXd off; // size diag.size() - 1

    int size() const { return static_cast<int>(diag.size()); }

    void multiply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
        const int m = size();
        y.resize(m);
        for (int i = 0; i < m; ++i) {
            double v = diag[i] * x[i];
            if (i > 0) v += off[i - 1] * x[i - 1];
            if (i + 1 < m) v += off[i] * x[i + 1];
            y[i] = v;
        }
    }
};

// LDL^T factorization of a symmetric tridiagonal matrix, no pivoting.
// Intended for positive definite shifted systems (H - sigma*M with sigma
// below the spectrum); factor() reports failure on a nonpositive pivot so
// the caller can lower the shift.
struct TridiagLDLT {
    Eigen::VectorXd d; // pivots
    Eigen::VectorXd l; // subdiagonal multipliers

    bool factor(const SymTridiag& a) {
        const int m = a.size();
        d.resize(m);
        l.resize(m > 0 ? m - 1 : 0);
        double prev = 0.0;
        for (int i = 0; i < m; ++i) {
            double di = a.diag[i];
            if (i > 0) di -= l[i - 1] * l[i - 1] * prev;
            if (!(di > 0.0)) return false;
            d[i] = di;
            prev = di;
            if (i + 1 < m) l[i] = a.off[i] / di;
        }
        return true;
    }

    void solve(Eigen::VectorXd& x) const {
        const int m = static_cast<int>(d.size());
        for (int i = 1; i < m; ++i) x[i] -= l[i - 1] * x[i - 1];
        for (int i = 0; i < m; ++i) x[i] /= d[i];
        for (int i = m - 2; i >= 0; --i) x[i] -= l[i] * x[i + 1];
    }
};

// Cholesky factorization M = L L^T of an s.p.d. tridiagonal mass matrix;
// L is lower bidiagonal with diagonal d and subdiagonal s.
struct TridiagCholesky {
    Eigen::VectorXd d;
    Eigen::VectorXd s;

    bool factor(const SymTridiag& m) {
        const int n = m.size();
        d.resize(n);
        s.resize(n > 0 ? n - 1 : 0);
        for (int i = 0; i < n; ++i) {
            double di = m.diag[i];
            if (i > 0) di -= s[i - 1] * s[i - 1];
            if (!(di > 0.0)) return false;
            d[i] = std::sqrt(di);
            if (i + 1 < n) s[i] = m.off[i] / d[i];
        }
        return true;
    }

    // y = L x, in place
    void mul(Eigen::VectorXd& x) const {
        for (int i = static_cast<int>(d.size()) - 1; i >= 0; --i) {
            double v = d[i] * x[i];
            if (i > 0) v += s[i - 1] * x[i - 1];
            x[i] = v;
        }
    }
    // y = L^T x, in place
    void mul_t(Eigen::VectorXd& x) const {
        const int n = static_cast<int>(d.size());
        for (int i = 0; i < n; ++i) {
            double v = d[i] * x[i];
            if (i + 1 < n) v += s[i] * x[i + 1];
            x[i] = v;
        }
    }
    // solve L x = b, in place
    void forward(Eigen::VectorXd& x) const {
        const int n = static_cast<int>(d.size());
        for (int i = 0; i < n; ++i) {
            double v = x[i];
            if (i > 0) v -= s[i - 1] * x[i - 1];
            x[i] = v / d[i];
        }
    }
    // solve L^T x = b, in place
    void backward(Eigen::VectorXd& x) const {
        const int n = static_cast<int>(d.size());
        for (int i = n - 1; i >= 0; --i) {
            double v = x[i];
            if (i + 1 < n) v -= s[i] * x[i + 1];
            x[i] = v / d[i];
        }
    }
};

} // namespace icec
