#pragma once

#include "icecsim/grid.hpp"
#include "icecsim/model.hpp"
#include "icecsim/wavefunction.hpp"

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace icec {

// Quadratic complex absorbing potential, W = -i eta (d past onset)^2.
struct CapSpec {
    double eta = 1e-3;
    double z_cap = 75.0;  // electronic onset, both ends at +-z_cap
    double r_cap = 16.0;  // nuclear onset, large-R end only
    bool electronic_left = true;
    bool electronic_right = true;
    bool nuclear = true;
};

enum class CapAxis { electronic, nuclear };

// Per-point -iW along one axis; zero before the onset, purely
// negative-imaginary beyond it.
std::vector<std::complex<double>> cap_profile(const Grid1D& axis, const CapSpec& spec, CapAxis which);

// Incoming Gaussian packet, parameterized by mean kinetic energy and kinetic
// energy spread. The momentum-space width sigma_p and center p0 solve
//   p0^2/2 + sigma_p^2/2            = epsilon_in
//   sigma_p^2 (p0^2 + sigma_p^2/2)  = delta_epsilon^2
// exactly (closed form), so the packet realizes both moments.
struct ProjectileSpec {
    double epsilon_in = 0.8;
    double delta_epsilon = 0.06;
    double z0 = -50.0;
    int direction = +1;

    double sigma_p() const;
    double p0() const;
    double sigma_z() const { return 0.5 / sigma_p(); } // position-density std
    void validate() const;
};

struct RelaxOptions {
    double dtau = 0.413;         // a.u. (0.01 fs)
    double tau_total = 330.0;    // hard cap on accumulated imaginary time (a.u.)
    double stationary_tol = 1e-8;
    int anneal_halvings = 2;     // dtau reductions after first stationarity
    int threads = 2;
};

struct RelaxResult {
    Grid1D grid_e, grid_R;
    std::vector<std::complex<double>> state; // (z slowest, R fastest), unit norm
    std::vector<double> energy_history;      // Rayleigh quotient per step
    double energy = 0.0;
    double tau_used = 0.0;
};

// Imaginary-time relaxation of the one-electron target under the
// Hamiltonian T_e + T_N + V_eff(e,He) + V_eff(e,Ne) + beta V_eff(Ne,He),
// Strang-split with spectral kinetics (Fourier in z, sine basis in R).
// Energies are Rayleigh quotients of the unsplit grid Hamiltonian; the flow
// aborts if they ever increase (step too large).
RelaxResult relax_target(const ModelParams& params, const Grid1D& grid_e, const Grid1D& grid_R,
                         const std::vector<double>& seed, const RelaxOptions& opt = {});

// Ground energy of the same discrete 2D grid Hamiltonian, computed without
// any operator splitting: shift-invert Lanczos with conjugate-gradient inner
// solves on the matrix-free operator. Oracle for relax_target.
double target_ground_energy_direct(const ModelParams& params, const Grid1D& grid_e,
                                   const Grid1D& grid_R, double tol = 1e-11);

struct InitialStateResult {
    WaveFunction3D psi;
    double overlap = 0.0; // integral |<phi_i|Phi(.,R)>|^2 dR before symmetrization
    std::vector<std::string> warnings;
};

// Symmetrized product of projectile packet and relaxed target, Eq.-(19)
// style, with the overlap-corrected normalization (reduces to 1/sqrt(2) when
// the packet and target do not overlap).
InitialStateResult build_initial_state(const RelaxResult& target, const ProjectileSpec& projectile,
                                       ExchangeSymmetry symmetry);

struct PropagateOptions {
    double dt = 0.05;      // a.u.
    double t_final = 413.4; // a.u. (10 fs)
    int output_stride = 8; // steps between snapshot emissions
    CapSpec caps;
    bool use_caps = true;
    int threads = 2;
    // called with the current state at t=0 and after every output_stride steps
    std::function<void(const WaveFunction3D&, int step)> on_output;
};

struct PropagationReport {
    int steps = 0;
    double final_norm2 = 1.0;
};

// Second-order Strang splitting e^{-i(V-iW)dt/2} e^{-iT dt} e^{-i(V-iW)dt/2}
// with the kinetic factor applied per axis in its spectral basis (Fourier on
// the periodic electronic axes, sine basis on the Dirichlet R axis). Norm is
// recorded every step in psi.norm_history; any norm increase beyond 1e-10
// relative or a NaN aborts with std::runtime_error.
//
// Precondition: dt * k_max^2 / 2 <= pi/2 on the electronic axis, so the
// kinetic phase advances less than a quarter cycle per step at the grid's
// Nyquist wavenumber.
PropagationReport propagate(WaveFunction3D& psi, const ModelParams& params,
                            const PropagateOptions& opt);

// <psi|H|psi> / <psi|psi> of the unsplit grid Hamiltonian (no CAP term).
double energy_expectation(const WaveFunction3D& psi, const ModelParams& params, int threads = 2);

} // namespace icec
