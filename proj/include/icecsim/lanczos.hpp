#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>

namespace icec {

struct LanczosOptions {
    int n_eigen = 1;         // converged pairs wanted (largest operator eigenvalues)
    int max_subspace = 200;  // hard cap on the Krylov dimension
    double tol = 1e-12;      // relative Ritz-residual tolerance
    int min_iters = 8;
    std::uint64_t seed = 0x9e3779b97f4a7c15ull;
};

struct LanczosResult {
    Eigen::VectorXd values;  // Ritz values, descending
    Eigen::MatrixXd vectors; // corresponding Ritz vectors (columns)
    int n_converged = 0;
    int iterations = 0;
};

// Lanczos with full reorthogonalization for a symmetric operator, converging
// the largest eigenvalues. The operator is a callback y = A x; the caller
// arranges shift-invert or other spectral transforms so that the wanted part
// of the spectrum is dominant.
LanczosResult lanczos_largest(const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& apply,
                              int dim, const LanczosOptions& opt);

} // namespace icec
