#pragma once

#include "icecsim/grid.hpp"

#include <complex>
#include <string>
#include <vector>

namespace icec {

enum class ExchangeSymmetry { symmetric, antisymmetric, none };

std::string to_string(ExchangeSymmetry s);
ExchangeSymmetry exchange_symmetry_from_string(const std::string& s);

// Complex amplitude over (z_e1, z_e2, R), C order with R fastest.
struct WaveFunction3D {
    Grid3D grid;
    std::vector<std::complex<double>> amp;
    double time = 0.0; // a.u.
    ExchangeSymmetry symmetry = ExchangeSymmetry::none;
    std::vector<std::pair<double, double>> norm_history; // (t a.u., |psi|^2)

    std::complex<double>& at(int i1, int i2, int ir) { return amp[grid.index(i1, i2, ir)]; }
    const std::complex<double>& at(int i1, int i2, int ir) const { return amp[grid.index(i1, i2, ir)]; }

    // Quadrature-weighted squared norm, deterministic reduction order.
    double norm2() const;
    void scale(double factor);

    // || psi(z1,z2,R) -+ psi(z2,z1,R) || / ||psi||, per the declared symmetry;
    // returns 0 for ExchangeSymmetry::none.
    double symmetry_residual() const;

    // Snapshot I/O: raw little-endian complex128 in storage order plus a JSON
    // manifest at path + ".json".
    void save(const std::string& path, const std::string& params_hash) const;
    static WaveFunction3D load(const std::string& path);
};

} // namespace icec
