#pragma once

#include "icecsim/grid.hpp"
#include "icecsim/tridiag.hpp"

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <vector>

namespace icec {

// Ordered eigenpairs of a 1D Hamiltonian on a Dirichlet grid.
//
// States are nodal-value vectors over the full grid (zero at the endpoints)
// and are orthonormal in the discretization's own inner product, i.e. the
// FEM consistent-mass quadrature <u|v> = u^T M v over interior nodes. The
// plain trapezoid quadrature agrees with it to O(h^2).
struct EigenSolution {
    Grid1D grid;
    std::vector<double> energies;      // ascending
    Eigen::MatrixXd states;            // grid.n x k
    std::vector<double> residual_norms;
    int n_converged = 0;

    // <u|v> under the consistent-mass quadrature of this grid.
    double mass_inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
};

struct TiseOptions {
    double tol = 1e-9;        // residual tolerance |H c - E M c| <= tol * max(1,|E|)
    int max_subspace = 0;     // 0 = automatic
    int dense_threshold = 900;
    bool force_dense = false;
    std::uint64_t seed = 0x2545f4914f6cdd1dull;
};

class EigensolveError : public std::runtime_error {
public:
    EigensolveError(const std::string& what, int n_converged)
        : std::runtime_error(what), n_converged_(n_converged) {}
    int n_converged() const { return n_converged_; }

private:
    int n_converged_;
};

// Variational solve of -(1/2m) d2/dz2 + V(z) on a Dirichlet grid: linear
// finite elements with consistent mass matrix, generalized problem reduced
// by the tridiagonal Cholesky of M, lowest pairs found by shift-invert
// Lanczos (dense solve for small interiors). FEM energies are upper bounds
// of the exact ones and are nonincreasing under uniform refinement.
EigenSolution solve_tise_1d(const Grid1D& grid, const std::function<double(double)>& potential,
                            double mass, int n_eigen, const TiseOptions& opt = {});

// Same, with the potential given by nodal samples (linearly interpolated
// inside elements).
EigenSolution solve_tise_1d(const Grid1D& grid, const std::vector<double>& potential_nodes,
                            double mass, int n_eigen, const TiseOptions& opt = {});

struct RefineStep {
    int n_points;
    double ground_energy;
};

struct RefineResult {
    EigenSolution solution;
    std::vector<RefineStep> history;
};

// Halves the grid spacing until successive ground energies differ by less
// than energy_tol; throws EigensolveError (with the history message) if the
// point cap is reached first.
RefineResult refine_until(double xmin, double xmax, const std::function<double(double)>& potential,
                          double mass, int n_eigen, double energy_tol,
                          int initial_points = 513, int max_points = (1 << 20) + 1,
                          const TiseOptions& opt = {});

// Sign changes of the interior part of a state; entries below rel_eps of the
// max magnitude are treated as zero crossings' neighbors, not sign carriers.
int count_nodes(const Eigen::VectorXd& state, double rel_eps = 1e-8);

} // namespace icec
