#pragma once

#include "icecsim/wavefunction.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace icec {

// Coordinate-space marginals of |psi|^2. "raw" integrates to ||psi||^2 (the
// CAP-depleted norm); normalized() rescales to 1.
struct Densities {
    std::vector<double> rho_e;  // over z (electron 1 traced convention)
    std::vector<double> rho_N;  // over R
    Eigen::MatrixXd rho_ee;     // (z1, z2)
    Eigen::MatrixXd rho_eN;     // (z, R)
    double norm2 = 1.0;
    bool raw = true;

    Densities normalized() const;
};

Densities compute_densities(const WaveFunction3D& psi);

// Natural-orbital populations of the electronic and nuclear reduced density
// matrices, from Gram matrices on the thin side of the matricized state with
// quadrature weights absorbed symmetrically.
struct SpectralData {
    std::vector<double> lambda_e; // descending, clamped at 0
    std::vector<double> lambda_N;
    double trace_e = 0.0;
    double trace_N = 0.0;
    std::optional<Eigen::MatrixXcd> orbitals_e; // natural orbitals if requested
};

SpectralData reduced_spectra(const WaveFunction3D& psi, bool want_orbitals = false);

// -sum lambda log2 lambda over raw populations; entries below 1e-12 skipped.
double von_neumann_entropy(const std::vector<double>& populations);

struct ConditionalEntropies {
    double e_given_N;  // S_e - S_N
    double N_given_e;  // 0 identically (pure tripartite state)
    double ee_given_N; // -S_N
    double eN_given_e; // -S_e
};
ConditionalEntropies conditional_entropies(double s_e, double s_N);

// -sum w rho log2 rho over points with rho > 1e-30.
double shannon_differential_entropy(const std::vector<double>& density,
                                    const std::vector<double>& weights);
double shannon_differential_entropy_2d(const Eigen::MatrixXd& density,
                                       const std::vector<double>& w_rows,
                                       const std::vector<double>& w_cols);

struct MutualInformations {
    double ee_vN; // 2 S_e - S_N
    double eN_vN; // S_N (purity identity)
    double ee_Sh; // 2 S_e^Sh - S_ee^Sh
    double eN_Sh; // S_e^Sh + S_N^Sh - S_eN^Sh
};
MutualInformations mutual_informations(double s_e_vn, double s_n_vn, double s_e_sh, double s_n_sh,
                                       double s_ee_sh, double s_en_sh);

// Weighted mean and standard deviation of a normalized 1D density.
std::pair<double, double> expectation_and_dispersion(const std::vector<double>& density,
                                                     const std::vector<double>& points,
                                                     const std::vector<double>& weights);

// One InfoTrace row: every observable at one analyzed time. Entropies in
// bits, positions in a.u., time in fs.
struct InfoRow {
    double t_fs = 0.0;
    double S_e_vN = 0.0, S_N_vN = 0.0;
    double S_e_given_N = 0.0, S_N_given_e = 0.0, S_ee_given_N = 0.0, S_eN_given_e = 0.0;
    double S_e_Sh = 0.0, S_N_Sh = 0.0, S_ee_Sh = 0.0, S_eN_Sh = 0.0;
    double I_ee_vN = 0.0, I_eN_vN = 0.0, I_ee_Sh = 0.0, I_eN_Sh = 0.0;
    double z_e_mean = 0.0, z_e_disp = 0.0, R_mean = 0.0, R_disp = 0.0;
    double norm = 0.0; // ||psi||^2
};

struct InfoTrace {
    std::vector<InfoRow> rows;
    std::vector<std::vector<double>> nat_pops_e; // per row, leading lambda_e
    int n_pops = 8;

    void append(const InfoRow& row, const std::vector<double>& pops);
    void write_csv(const std::string& path) const;
    void write_nop_csv(const std::string& path) const;
    static InfoTrace read_csv(const std::string& path);
};

// Full per-snapshot analysis: densities, spectra, every entropy and mutual
// information, moments. Entropies use raw quantities, moments normalized
// densities; force_normalized switches the entropy convention.
InfoRow analyze_snapshot(const WaveFunction3D& psi, bool force_normalized = false,
                         std::vector<double>* pops_out = nullptr);

struct CollisionTimes {
    double t_S;     // argmax S_e_vN
    double t_disp;  // argmin z_e_disp
    double t_I;     // argmin I_ee_Sh
};

// Extrema inside [t_be, t_af] (fs), 3-point parabolic refinement, ties to
// the earliest time. Throws std::runtime_error("window too small") when an
// extremum sits on the window boundary.
CollisionTimes estimate_collision_times(const InfoTrace& trace, double t_be_fs, double t_af_fs);

struct Retention {
    double before; // delta_S(t_col - dt)
    double after;  // delta_S(t_col + dt)
};

// delta_S(t) = S_e_vN(t) / S_e_vN(t_col), linear interpolation between rows.
Retention entanglement_retention(const InfoTrace& trace, double t_col_fs, double delta_t_fs);

} // namespace icec
