#include "icecsim/model.hpp"

#include "icecsim/erfcx.hpp"

#include <cmath>
#include <stdexcept>

namespace icec {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrt2 = 1.41421356237309504880;
} // namespace

void ModelParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw std::invalid_argument(std::string("ModelParams: ") + name + " must be positive");
    };
    positive(l_c, "l_c");
    positive(l_alpha, "l_alpha");
    positive(q_He, "q_He");
    positive(q_Ne, "q_Ne");
    positive(m_Ne, "m_Ne");
    positive(m_He, "m_He");
    if (q_e != 1.0) throw std::invalid_argument("ModelParams: q_e must be exactly 1");
    if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("ModelParams: beta must lie in (0, 1]");
    const double frame = c_He() - c_Ne();
    if (std::abs(frame - 1.0) > 1e-12)
        throw std::invalid_argument("ModelParams: frame coefficients violate c_He - c_Ne = 1");
}

PairSpec PairSpec::electron_electron(const ModelParams& p) {
    return PairSpec{p.q_e * p.q_e, std::numeric_limits<double>::infinity(), 1.0};
}
PairSpec PairSpec::electron_He(const ModelParams& p) {
    return PairSpec{-p.q_e * p.q_He, p.l_alpha, 1.0};
}
PairSpec PairSpec::electron_Ne(const ModelParams& p) {
    return PairSpec{-p.q_e * p.q_Ne, p.l_alpha, 1.0};
}
PairSpec PairSpec::cation_cation(const ModelParams& p) {
    return PairSpec{p.q_He * p.q_Ne, p.l_alpha, p.beta};
}

double effective_potential(double z, const PairSpec& pair, double l_c) {
    if (!std::isfinite(z)) throw std::domain_error("effective_potential: non-finite z");
    if (!(l_c > 0.0)) throw std::domain_error("effective_potential: l_c must be positive");
    if (pair.charge_product == 0.0) return 0.0;
    if (!pair.is_coulomb() && !(pair.screening_length > 0.0))
        throw std::domain_error("effective_potential: screening length must be positive");

    const double s2lc = kSqrt2 * l_c;
    const double pref = std::pow(kPi, 1.5) / (2.0 * s2lc) * pair.charge_product * pair.scale;
    const double u = std::abs(z) / s2lc;
    if (pair.is_coulomb()) return pref * erfcx(u);
    const double shift = s2lc / (2.0 * pair.screening_length);
    return pref * std::exp(-std::abs(z) / pair.screening_length) * erfcx(u + shift);
}

double total_potential_3d(double z_e1, double z_e2, double R, const ModelParams& p) {
    if (!(R > 0.0)) throw std::domain_error("total_potential_3d: R must be positive");
    const double zNe = p.c_Ne() * R;
    const double zHe = p.c_He() * R;
    const PairSpec ee = PairSpec::electron_electron(p);
    const PairSpec eHe = PairSpec::electron_He(p);
    const PairSpec eNe = PairSpec::electron_Ne(p);
    const PairSpec nn = PairSpec::cation_cation(p);
    return effective_potential(z_e1 - z_e2, ee, p.l_c)
         + effective_potential(z_e1 - zNe, eNe, p.l_c)
         + effective_potential(z_e1 - zHe, eHe, p.l_c)
         + effective_potential(z_e2 - zNe, eNe, p.l_c)
         + effective_potential(z_e2 - zHe, eHe, p.l_c)
         + effective_potential(R, nn, p.l_c);
}

double ion_potential(double z, double R, const ModelParams& p) {
    if (!(R > 0.0)) throw std::domain_error("ion_potential: R must be positive");
    return effective_potential(z - p.c_He() * R, PairSpec::electron_He(p), p.l_c)
         + effective_potential(z - p.c_Ne() * R, PairSpec::electron_Ne(p), p.l_c)
         + effective_potential(R, PairSpec::cation_cation(p), p.l_c);
}

} // namespace icec
