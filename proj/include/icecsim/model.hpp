#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace icec {

// Physical parameters of the confined e- + NeHe+ model. The single source of
// truth for every interaction term; immutable once validated.
struct ModelParams {
    double l_c = 1.25;       // confinement length (a.u.)
    double l_alpha = 1.986;  // Yukawa length shared by all screened pairs (a.u.)
    double q_He = 1.77578;   // effective He+ charge, calibrated to eps_dis_He
    double q_Ne = 1.59751;   // effective Ne+ charge, calibrated to eps_dis_Ne
    double q_e = 1.0;        // electron charge magnitude, exactly 1
    double beta = 0.8;       // cation-cation interaction factor
    double m_Ne = 36785.339; // a.u.
    double m_He = 7296.293;  // a.u.

    double m_red() const { return m_Ne * m_He / (m_Ne + m_He); }
    // Nuclear positions in the nuclear-CM frame: z_Ne = c_Ne * R, z_He = c_He * R.
    double c_Ne() const { return -m_red() / m_Ne; }
    double c_He() const { return m_red() / m_He; }

    void validate() const; // throws std::invalid_argument on violated invariants
};

// One pair interaction: charge product, screening, and a multiplicative
// scale (1 everywhere except the cation-cation pair, which carries beta).
struct PairSpec {
    double charge_product = 0.0;
    double screening_length = std::numeric_limits<double>::infinity(); // inf = Coulomb
    double scale = 1.0;

    bool is_coulomb() const { return !(screening_length < std::numeric_limits<double>::infinity()); }

    static PairSpec electron_electron(const ModelParams& p);
    static PairSpec electron_He(const ModelParams& p);
    static PairSpec electron_Ne(const ModelParams& p);
    static PairSpec cation_cation(const ModelParams& p);
};

// Transverse-confinement-averaged 1D interaction, evaluated through erfcx so
// that no exp(x^2) ever appears separately. Even in z, finite at contact,
// Yukawa- or (pi/2)/|z| Coulomb-tailed at large separation.
double effective_potential(double z, const PairSpec& pair, double l_c);

// Full three-DOF potential: e-e Coulomb, four electron-nucleus Yukawa terms,
// and the beta-scaled nucleus-nucleus Yukawa term. Symmetric in z1 <-> z2.
double total_potential_3d(double z_e1, double z_e2, double R, const ModelParams& p);

// Electronic potential of the one-electron ion at internuclear distance R
// (electron-He + electron-Ne + scaled Ne-He). This is both the PEC
// Hamiltonian's potential and the target-relaxation potential.
double ion_potential(double z, double R, const ModelParams& p);

struct CalibrationOptions {
    double bracket_lo = 0.5;
    double bracket_hi = 3.0;
    double q_min = 1e-3; // bracket may expand down to here ...
    double q_max = 10.0; // ... and up to here
    double tol_q = 1e-8;
    double z_half_width = 60.0; // solver domain (-w, w)
    int n_points = 4801;
};

struct CalibrationResult {
    double q = 0.0;
    double achieved_energy = 0.0;
    int iterations = 0;
    double bracket_lo = 0.0, bracket_hi = 0.0;
};

// Finds q such that the ground state of T + V_eff(e,cation; -q) equals
// target_energy, by bisection over a bracket that is expanded inside
// (q_min, q_max] if needed. The ground energy is verified to be strictly
// decreasing in q across the bracket; failures throw CalibrationError.
struct CalibrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
CalibrationResult calibrate_charge(double target_energy, double l_alpha, double l_c,
                                   double mass, const CalibrationOptions& opt = {});

} // namespace icec
