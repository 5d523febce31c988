#include "icecsim/wavefunction.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace icec {

std::string to_string(ExchangeSymmetry s) {
    switch (s) {
        case ExchangeSymmetry::symmetric: return "symmetric";
        case ExchangeSymmetry::antisymmetric: return "antisymmetric";
        default: return "none";
    }
}

ExchangeSymmetry exchange_symmetry_from_string(const std::string& s) {
    if (s == "symmetric") return ExchangeSymmetry::symmetric;
    if (s == "antisymmetric") return ExchangeSymmetry::antisymmetric;
    if (s == "none") return ExchangeSymmetry::none;
    throw std::invalid_argument("unknown exchange symmetry: " + s);
}

double WaveFunction3D::norm2() const {
    const int n1 = grid.electronic.n, nr = grid.nuclear.n;
    const auto& we = grid.electronic.weights;
    const auto& wr = grid.nuclear.weights;
    std::vector<double> partial(n1, 0.0);
#pragma omp parallel for schedule(static)
    for (int i1 = 0; i1 < n1; ++i1) {
        double acc = 0.0;
        const std::complex<double>* p = amp.data() + static_cast<std::int64_t>(i1) * n1 * nr;
        for (int i2 = 0; i2 < n1; ++i2) {
            double rowacc = 0.0;
            for (int ir = 0; ir < nr; ++ir) {
                const std::complex<double> v = p[static_cast<std::int64_t>(i2) * nr + ir];
                rowacc += wr[ir] * std::norm(v);
            }
            acc += we[i2] * rowacc;
        }
        partial[i1] = we[i1] * acc;
    }
    double total = 0.0;
    for (int i1 = 0; i1 < n1; ++i1) total += partial[i1];
    return total;
}

void WaveFunction3D::scale(double factor) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(amp.size()); ++i) amp[i] *= factor;
}

double WaveFunction3D::symmetry_residual() const {
    if (symmetry == ExchangeSymmetry::none) return 0.0;
    const double sign = symmetry == ExchangeSymmetry::symmetric ? 1.0 : -1.0;
    const int n1 = grid.electronic.n, nr = grid.nuclear.n;
    const auto& we = grid.electronic.weights;
    const auto& wr = grid.nuclear.weights;
    std::vector<double> partial(n1, 0.0);
#pragma omp parallel for schedule(static)
    for (int i1 = 0; i1 < n1; ++i1) {
        double acc = 0.0;
        for (int i2 = 0; i2 < n1; ++i2) {
            double rowacc = 0.0;
            const std::complex<double>* a = amp.data() + grid.index(i1, i2, 0);
            const std::complex<double>* b = amp.data() + grid.index(i2, i1, 0);
            for (int ir = 0; ir < nr; ++ir) rowacc += wr[ir] * std::norm(a[ir] - sign * b[ir]);
            acc += we[i2] * rowacc;
        }
        partial[i1] = we[i1] * acc;
    }
    double total = 0.0;
    for (int i1 = 0; i1 < n1; ++i1) total += partial[i1];
    const double n2 = norm2();
    return n2 > 0.0 ? std::sqrt(total / n2) : 0.0;
}

namespace {

nlohmann::json grid1d_to_json(const Grid1D& g) {
    return {{"n", g.n},
            {"min", g.xmin},
            {"max", g.xmax},
            {"boundary", g.boundary == Boundary::dirichlet ? "dirichlet" : "periodic"}};
}

Grid1D grid1d_from_json(const nlohmann::json& j) {
    const std::string b = j.at("boundary");
    if (b == "dirichlet") return Grid1D::dirichlet(j.at("min"), j.at("max"), j.at("n"));
    return Grid1D::periodic(j.at("min"), j.at("max"), j.at("n"));
}

} // namespace

void WaveFunction3D::save(const std::string& path, const std::string& params_hash) const {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("WaveFunction3D::save: cannot open " + path);
    const size_t written = std::fwrite(amp.data(), sizeof(std::complex<double>), amp.size(), f);
    std::fclose(f);
    if (written != amp.size()) throw std::runtime_error("WaveFunction3D::save: short write to " + path);

    nlohmann::json j{
        {"format", "complex128-le"},
        {"order", "z_e1 slowest, z_e2, R fastest"},
        {"grids", {{"electronic", grid1d_to_json(grid.electronic)}, {"nuclear", grid1d_to_json(grid.nuclear)}}},
        {"time_au", time},
        {"norm2", norm2()},
        {"symmetry", to_string(symmetry)},
        {"params_hash", params_hash},
    };
    std::ofstream mf(path + ".json");
    if (!mf) throw std::runtime_error("WaveFunction3D::save: cannot open manifest for " + path);
    mf << j.dump(2) << "\n";
}

WaveFunction3D WaveFunction3D::load(const std::string& path) {
    std::ifstream mf(path + ".json");
    if (!mf) throw std::runtime_error("WaveFunction3D::load: missing manifest for " + path);
    nlohmann::json j;
    mf >> j;

    WaveFunction3D w;
    w.grid = Grid3D(grid1d_from_json(j.at("grids").at("electronic")),
                    grid1d_from_json(j.at("grids").at("nuclear")));
    w.time = j.at("time_au");
    w.symmetry = exchange_symmetry_from_string(j.at("symmetry"));
    w.amp.resize(w.grid.total_points());

    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("WaveFunction3D::load: cannot open " + path);
    const size_t read = std::fread(w.amp.data(), sizeof(std::complex<double>), w.amp.size(), f);
    std::fclose(f);
    if (read != w.amp.size()) throw std::runtime_error("WaveFunction3D::load: short read from " + path);
    return w;
}

} // namespace icec
