#include "icecsim/lanczos.hpp"

#include <cmath>
#include <random>

namespace icec {

LanczosResult lanczos_largest(const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& apply,
                              int dim, const LanczosOptions& opt) {
    const int cap = std::min(dim, opt.max_subspace);
    Eigen::MatrixXd basis(dim, cap);
    Eigen::VectorXd alpha(cap), beta(cap); // beta[j] couples v_j to v_{j+1}

    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = uni(rng);
    v.normalize();
    basis.col(0) = v;

    Eigen::VectorXd w(dim);
    LanczosResult out;

    int m = 0;
    double beta_last = 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small;

    auto ritz_pass = [&](int mm, bool build_vectors) -> bool {
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(mm, mm);
        for (int i = 0; i < mm; ++i) {
            t(i, i) = alpha[i];
            if (i + 1 < mm) t(i, i + 1) = t(i + 1, i) = beta[i];
        }
        small.compute(t);
        // ascending from Eigen; we want descending
        const int want = std::min(opt.n_eigen, mm);
        const double scale = std::max(std::abs(small.eigenvalues()(mm - 1)),
                                      std::abs(small.eigenvalues()(0)));
        int conv = 0;
        for (int k = 0; k < want; ++k) {
            const int idx = mm - 1 - k;
            const double res = std::abs(beta_last * small.eigenvectors()(mm - 1, idx));
            if (res <= opt.tol * std::max(scale, 1e-300)) ++conv;
        }
        if (build_vectors) {
            out.values.resize(want);
            out.vectors.resize(dim, want);
            for (int k = 0; k < want; ++k) {
                const int idx = mm - 1 - k;
                out.values[k] = small.eigenvalues()(idx);
                out.vectors.col(k) = basis.leftCols(mm) * small.eigenvectors().col(idx);
                out.vectors.col(k).normalize();
            }
            out.n_converged = conv;
            out.iterations = mm;
        }
        return conv >= std::min(opt.n_eigen, mm);
    };

    while (m < cap) {
        apply(basis.col(m), w);
        alpha[m] = basis.col(m).dot(w);
        w -= alpha[m] * basis.col(m);
        if (m > 0) w -= beta[m - 1] * basis.col(m - 1);
        // full reorthogonalization, two passes
        for (int pass = 0; pass < 2; ++pass) {
            Eigen::VectorXd proj = basis.leftCols(m + 1).transpose() * w;
            w -= basis.leftCols(m + 1) * proj;
        }
        beta_last = w.norm();
        ++m;
        const bool breakdown = beta_last < 1e-300 || (m >= 2 && beta_last < 1e-14 * std::abs(alpha[0]));
        if (m >= std::max(opt.min_iters, opt.n_eigen + 2) || breakdown || m == cap) {
            if (ritz_pass(m, false) || breakdown || m == cap) {
                ritz_pass(m, true);
                if (out.n_converged >= std::min(opt.n_eigen, m) || breakdown) return out;
                if (m == cap) return out;
            }
        }
        if (m < cap) {
            beta[m - 1] = beta_last;
            basis.col(m) = w / beta_last;
        }
    }
    return out;
}

} // namespace icec
