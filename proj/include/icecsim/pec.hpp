#pragma once

#include "icecsim/eigensolve.hpp"
#include "icecsim/grid.hpp"
#include "icecsim/model.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace icec {

// Born-Oppenheimer curves eps_n(R) and the electronic states behind them.
struct PecTable {
    std::vector<double> R_grid;                 // ascending
    std::vector<std::vector<double>> curves;    // curves[n][iR]
    Grid1D electronic_grid;
    // electronic_states[n][iR] is xi_n(z; R) on electronic_grid, normalized
    // under the grid quadrature and phase-fixed for continuity in R.
    std::vector<std::vector<Eigen::VectorXd>> states;
    bool states_stored = false;

    int n_curves() const { return static_cast<int>(curves.size()); }
};

struct PecDerived {
    double R_eq = 0.0;
    double eps0_at_Req = 0.0;
    double delta_eps_01 = 0.0;
    double delta_eps_02 = 0.0;
    double curvature = 0.0; // d2 eps_0 / dR2 at R_eq, windowed parabolic fit
    std::vector<double> dissociation_limits;
};

struct PecScanOptions {
    bool store_states = true;
    TiseOptions tise;
    int threads = 0; // 0 = use all
};

// Solves the one-electron ion Hamiltonian for every R in R_grid and records
// the lowest n_curves eigenpairs. Per-R solves run in parallel; any failure
// aborts the scan naming the offending R.
PecTable scan_pec(const ModelParams& params, const std::vector<double>& R_grid, int n_curves,
                  const Grid1D& electronic_grid, const PecScanOptions& opt = {});

// Equilibrium distance by 3-point parabolic refinement of the discrete
// minimum, vertical gaps at the nearest grid point, dissociation limits at
// the scan end. Throws std::runtime_error("unbound ground curve") when
// eps_0 has no interior minimum.
PecDerived derive_thresholds(const PecTable& table);

// Nuclear TISE -(1/2 m_red) d2/dR2 + eps_n(R) on a Dirichlet grid spanning
// the sampled curve (cubic-spline interpolated). Returns bound vibrational
// states; an empty solution (flagged by n_converged == 0 and no energies)
// when no state lies below the dissociation limit.
EigenSolution vibrational_states(const std::vector<double>& R_samples,
                                 const std::vector<double>& curve, double m_red, int n_states,
                                 int grid_points = 4001);

// CSV with header "R, eps_0, eps_1, ..." (RFC-4180 style, LF line ends).
void write_pec_csv(const PecTable& table, const std::string& path);

} // namespace icec
