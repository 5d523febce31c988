#include "icecsim/model.hpp"

#include "icecsim/eigensolve.hpp"

#include <cmath>
#include <sstream>

namespace icec {

namespace {

double ground_energy(double q, double l_alpha, double l_c, double mass, const CalibrationOptions& opt) {
    const Grid1D grid = Grid1D::dirichlet(-opt.z_half_width, opt.z_half_width, opt.n_points);
    PairSpec pair{-q, l_alpha, 1.0};
    auto v = [&](double z) { return effective_potential(z, pair, l_c); };
    TiseOptions topt;
    topt.tol = 1e-8;
    return solve_tise_1d(grid, v, mass, 1, topt).energies[0];
}

} // namespace

CalibrationResult calibrate_charge(double target_energy, double l_alpha, double l_c,
                                   double mass, const CalibrationOptions& opt) {
    if (!(target_energy < 0.0))
        throw CalibrationError("calibrate_charge: target energy must be negative (bound state)");

    double lo = opt.bracket_lo, hi = opt.bracket_hi;
    double e_lo = ground_energy(lo, l_alpha, l_c, mass, opt);
    double e_hi = ground_energy(hi, l_alpha, l_c, mass, opt);
    if (!(e_lo > e_hi))
        throw CalibrationError("calibrate_charge: ground energy not decreasing in q across initial bracket");

    // expand until target is inside [e_hi, e_lo]
    while (target_energy > e_lo) {
        if (lo <= opt.q_min) {
            std::ostringstream os;
            os << "calibrate_charge: target " << target_energy << " above E(q_min); E(" << lo
               << ") = " << e_lo;
            throw CalibrationError(os.str());
        }
        hi = lo;
        e_hi = e_lo;
        lo = std::max(opt.q_min, lo / 2.0);
        e_lo = ground_energy(lo, l_alpha, l_c, mass, opt);
        if (!(e_lo > e_hi)) throw CalibrationError("calibrate_charge: monotonicity lost while expanding bracket down");
    }
    while (target_energy < e_hi) {
        if (hi >= opt.q_max) {
            std::ostringstream os;
            os << "calibrate_charge: target " << target_energy << " below E(q_max); E(" << hi
               << ") = " << e_hi;
            throw CalibrationError(os.str());
        }
        lo = hi;
        e_lo = e_hi;
        hi = std::min(opt.q_max, hi * 1.5);
        e_hi = ground_energy(hi, l_alpha, l_c, mass, opt);
        if (!(e_lo > e_hi)) throw CalibrationError("calibrate_charge: monotonicity lost while expanding bracket up");
    }

    CalibrationResult res;
    res.bracket_lo = lo;
    res.bracket_hi = hi;
    int it = 0;
    while (hi - lo > opt.tol_q) {
        const double mid = 0.5 * (lo + hi);
        const double e_mid = ground_energy(mid, l_alpha, l_c, mass, opt);
        // deeper energy means larger q; target deeper than e_mid -> go right
        if (target_energy < e_mid)
            lo = mid;
        else
            hi = mid;
        ++it;
        if (it > 200) throw CalibrationError("calibrate_charge: bisection failed to shrink bracket");
    }
    res.q = 0.5 * (lo + hi);
    res.achieved_energy = ground_energy(res.q, l_alpha, l_c, mass, opt);
    res.iterations = it;
    return res;
}

} // namespace icec
