#include "icecsim/analysis.hpp"

#include "icecsim/units.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace icec {

namespace {

constexpr double kPopClamp = 1e-12;
constexpr double kDensityFloor = 1e-30;

double log2_safe(double x) { return std::log2(x); }

} // namespace

Densities Densities::normalized() const {
    Densities out = *this;
    if (!(norm2 > 0.0)) throw std::runtime_error("Densities: zero norm");
    const double inv = 1.0 / norm2;
    for (auto& v : out.rho_e) v *= inv;
    for (auto& v : out.rho_N) v *= inv;
    out.rho_ee *= inv;
    out.rho_eN *= inv;
    out.raw = false;
    out.norm2 = 1.0;
    return out;
}

Densities compute_densities(const WaveFunction3D& psi) {
    const int n1 = psi.grid.electronic.n, nr = psi.grid.nuclear.n;
    const auto& we = psi.grid.electronic.weights;
    const auto& wr = psi.grid.nuclear.weights;

    Densities d;
    d.rho_e.assign(n1, 0.0);
    d.rho_N.assign(nr, 0.0);
    d.rho_ee = Eigen::MatrixXd::Zero(n1, n1);
    d.rho_eN = Eigen::MatrixXd::Zero(n1, nr);

    std::vector<std::vector<double>> rho_n_partial(n1, std::vector<double>(nr, 0.0));
#pragma omp parallel for schedule(static)
    for (int i1 = 0; i1 < n1; ++i1) {
        const std::complex<double>* p = psi.amp.data() + psi.grid.index(i1, 0, 0);
        double* rr = rho_n_partial[i1].data();
        for (int i2 = 0; i2 < n1; ++i2) {
            const std::complex<double>* q = p + static_cast<std::int64_t>(i2) * nr;
            double row_ee = 0.0;
            for (int ir = 0; ir < nr; ++ir) {
                const double a2 = std::norm(q[ir]);
                row_ee += wr[ir] * a2;
                d.rho_eN(i1, ir) += we[i2] * a2;
                rr[ir] += we[i2] * a2;
            }
            d.rho_ee(i1, i2) = row_ee;
        }
        double acc = 0.0;
        for (int i2 = 0; i2 < n1; ++i2) acc += we[i2] * d.rho_ee(i1, i2);
        d.rho_e[i1] = acc;
    }
    for (int i1 = 0; i1 < n1; ++i1)
        for (int ir = 0; ir < nr; ++ir) d.rho_N[ir] += we[i1] * rho_n_partial[i1][ir];

    double nn = 0.0;
    for (int ir = 0; ir < nr; ++ir) nn += wr[ir] * d.rho_N[ir];
    d.norm2 = nn;
    if (!(nn > 0.0)) throw std::runtime_error("compute_densities: zero-norm snapshot");
    d.raw = true;
    return d;
}

SpectralData reduced_spectra(const WaveFunction3D& psi, bool want_orbitals) {
    const int n1 = psi.grid.electronic.n, nr = psi.grid.nuclear.n;
    if (n1 > 2048) throw std::runtime_error("reduced_spectra: electronic axis exceeds matricization budget");
    const auto& we = psi.grid.electronic.weights;
    const auto& wr = psi.grid.nuclear.weights;

    // scratch with sqrt(w1 w2 wR) absorbed symmetrically
    std::vector<std::complex<double>> scaled(psi.amp.size());
    std::vector<double> sq_e(n1), sq_r(nr);
    for (int i = 0; i < n1; ++i) sq_e[i] = std::sqrt(we[i]);
    for (int j = 0; j < nr; ++j) sq_r[j] = std::sqrt(wr[j]);
#pragma omp parallel for schedule(static)
    for (int i1 = 0; i1 < n1; ++i1) {
        const std::complex<double>* p = psi.amp.data() + psi.grid.index(i1, 0, 0);
        std::complex<double>* s = scaled.data() + psi.grid.index(i1, 0, 0);
        for (int i2 = 0; i2 < n1; ++i2) {
            const double f12 = sq_e[i1] * sq_e[i2];
            for (int ir = 0; ir < nr; ++ir)
                s[static_cast<std::int64_t>(i2) * nr + ir] =
                    p[static_cast<std::int64_t>(i2) * nr + ir] * (f12 * sq_r[ir]);
        }
    }

    using RowMat = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMat> m_e(scaled.data(), n1, static_cast<Eigen::Index>(n1) * nr);

    // electronic Gram, deterministic row-block parallelism
    Eigen::MatrixXcd gram_e(n1, n1);
    const int block = 32;
#pragma omp parallel for schedule(static)
    for (int b0 = 0; b0 < n1; b0 += block) {
        const int nb = std::min(block, n1 - b0);
        gram_e.block(b0, 0, nb, n1).noalias() = m_e.middleRows(b0, nb) * m_e.adjoint();
    }

    // nuclear Gram: G_N(r,r') = sum_{i1,i2} scaled(i1,i2,r) conj(scaled(i1,i2,r'))
    Eigen::MatrixXcd gram_n = Eigen::MatrixXcd::Zero(nr, nr);
    {
        std::vector<Eigen::MatrixXcd> partial(static_cast<size_t>(omp_get_max_threads()),
                                              Eigen::MatrixXcd::Zero(nr, nr));
        // deterministic: accumulate per-i1 blocks serially ordered
        std::vector<Eigen::MatrixXcd> per_i1(n1);
#pragma omp parallel for schedule(static)
        for (int i1 = 0; i1 < n1; ++i1) {
            Eigen::Map<const RowMat> lines(scaled.data() + psi.grid.index(i1, 0, 0), n1, nr);
            per_i1[i1] = lines.adjoint() * lines; // (nr x nr), conj pairing below
        }
        for (int i1 = 0; i1 < n1; ++i1) gram_n += per_i1[i1];
        gram_n = gram_n.conjugate(); // adjoint*lines gives conj(a) b; we need a conj(b)
    }

    SpectralData out;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es_e;
    es_e.compute(gram_e, want_orbitals ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es_e.info() != Eigen::Success) throw std::runtime_error("reduced_spectra: electronic eigensolve failed");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es_n(gram_n);
    if (es_n.info() != Eigen::Success) throw std::runtime_error("reduced_spectra: nuclear eigensolve failed");

    out.lambda_e.resize(n1);
    for (int i = 0; i < n1; ++i) {
        double v = es_e.eigenvalues()(n1 - 1 - i);
        if (v < 0.0 && v > -kPopClamp) v = 0.0;
        out.lambda_e[i] = std::max(v, 0.0);
        out.trace_e += out.lambda_e[i];
    }
    out.lambda_N.resize(nr);
    for (int i = 0; i < nr; ++i) {
        double v = es_n.eigenvalues()(nr - 1 - i);
        if (v < 0.0 && v > -kPopClamp) v = 0.0;
        out.lambda_N[i] = std::max(v, 0.0);
        out.trace_N += out.lambda_N[i];
    }
    if (want_orbitals) {
        Eigen::MatrixXcd orb = es_e.eigenvectors().rowwise().reverse();
        for (int i = 0; i < n1; ++i)
            orb.row(i) *= sq_e[i] > 0.0 ? 1.0 / sq_e[i] : 0.0;
        out.orbitals_e = std::move(orb);
    }
    return out;
}

double von_neumann_entropy(const std::vector<double>& populations) {
    double s = 0.0;
    for (double l : populations) {
        if (l < kPopClamp) continue;
        s -= l * log2_safe(l);
    }
    return s;
}

ConditionalEntropies conditional_entropies(double s_e, double s_N) {
    return ConditionalEntropies{s_e - s_N, 0.0, -s_N, -s_e};
}

double shannon_differential_entropy(const std::vector<double>& density,
                                    const std::vector<double>& weights) {
    if (density.size() != weights.size())
        throw std::invalid_argument("shannon_differential_entropy: size mismatch");
    double s = 0.0;
    for (size_t i = 0; i < density.size(); ++i) {
        const double rho = density[i];
        if (rho < 0.0 && rho < -1e-14)
            throw std::invalid_argument("shannon_differential_entropy: negative density");
        if (rho <= kDensityFloor) continue;
        s -= weights[i] * rho * log2_safe(rho);
    }
    return s;
}

double shannon_differential_entropy_2d(const Eigen::MatrixXd& density,
                                       const std::vector<double>& w_rows,
                                       const std::vector<double>& w_cols) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < density.rows(); ++i) {
        double row = 0.0;
        for (Eigen::Index j = 0; j < density.cols(); ++j) {
            const double rho = density(i, j);
            if (rho <= kDensityFloor) continue;
            row -= w_cols[static_cast<size_t>(j)] * rho * log2_safe(rho);
        }
        s += w_rows[static_cast<size_t>(i)] * row;
    }
    return s;
}

MutualInformations mutual_informations(double s_e_vn, double s_n_vn, double s_e_sh, double s_n_sh,
                                       double s_ee_sh, double s_en_sh) {
    MutualInformations mi;
    mi.ee_vN = 2.0 * s_e_vn - s_n_vn;
    mi.eN_vN = s_n_vn;
    mi.ee_Sh = 2.0 * s_e_sh - s_ee_sh;
    mi.eN_Sh = s_e_sh + s_n_sh - s_en_sh;
    return mi;
}

std::pair<double, double> expectation_and_dispersion(const std::vector<double>& density,
                                                     const std::vector<double>& points,
                                                     const std::vector<double>& weights) {
    double nn = 0.0, m1 = 0.0;
    for (size_t i = 0; i < density.size(); ++i) {
        nn += weights[i] * density[i];
        m1 += weights[i] * density[i] * points[i];
    }
    if (!(nn > 1e-300)) throw std::runtime_error("expectation_and_dispersion: zero-integral density");
    m1 /= nn;
    double m2 = 0.0;
    for (size_t i = 0; i < density.size(); ++i) {
        const double dz = points[i] - m1;
        m2 += weights[i] * density[i] * dz * dz;
    }
    return {m1, std::sqrt(std::max(m2 / nn, 0.0))};
}

InfoRow analyze_snapshot(const WaveFunction3D& psi, bool force_normalized,
                         std::vector<double>* pops_out) {
    const auto& ge = psi.grid.electronic;
    const auto& gr = psi.grid.nuclear;

    Densities raw = compute_densities(psi);
    Densities norm = raw.normalized();
    SpectralData spec = reduced_spectra(psi);

    std::vector<double> lam_e = spec.lambda_e, lam_n = spec.lambda_N;
    const Densities& for_entropy = force_normalized ? norm : raw;
    if (force_normalized) {
        const double inv_e = spec.trace_e > 0 ? 1.0 / spec.trace_e : 0.0;
        const double inv_n = spec.trace_N > 0 ? 1.0 / spec.trace_N : 0.0;
        for (auto& v : lam_e) v *= inv_e;
        for (auto& v : lam_n) v *= inv_n;
    }

    InfoRow row;
    row.t_fs = au_to_fs(psi.time);
    row.norm = raw.norm2;
    row.S_e_vN = von_neumann_entropy(lam_e);
    row.S_N_vN = von_neumann_entropy(lam_n);
    const ConditionalEntropies ce = conditional_entropies(row.S_e_vN, row.S_N_vN);
    row.S_e_given_N = ce.e_given_N;
    row.S_N_given_e = ce.N_given_e;
    row.S_ee_given_N = ce.ee_given_N;
    row.S_eN_given_e = ce.eN_given_e;

    row.S_e_Sh = shannon_differential_entropy(for_entropy.rho_e, ge.weights);
    row.S_N_Sh = shannon_differential_entropy(for_entropy.rho_N, gr.weights);
    row.S_ee_Sh = shannon_differential_entropy_2d(for_entropy.rho_ee, ge.weights, ge.weights);
    row.S_eN_Sh = shannon_differential_entropy_2d(for_entropy.rho_eN, ge.weights, gr.weights);

    const MutualInformations mi =
        mutual_informations(row.S_e_vN, row.S_N_vN, row.S_e_Sh, row.S_N_Sh, row.S_ee_Sh, row.S_eN_Sh);
    row.I_ee_vN = mi.ee_vN;
    row.I_eN_vN = mi.eN_vN;
    row.I_ee_Sh = mi.ee_Sh;
    row.I_eN_Sh = mi.eN_Sh;

    auto [zm, zs] = expectation_and_dispersion(norm.rho_e, ge.points, ge.weights);
    row.z_e_mean = zm;
    row.z_e_disp = zs;
    auto [rm, rs] = expectation_and_dispersion(norm.rho_N, gr.points, gr.weights);
    row.R_mean = rm;
    row.R_disp = rs;

    if (pops_out) *pops_out = spec.lambda_e;
    return row;
}

void InfoTrace::append(const InfoRow& row, const std::vector<double>& pops) {
    rows.push_back(row);
    std::vector<double> lead(pops.begin(), pops.begin() + std::min<size_t>(pops.size(), n_pops));
    lead.resize(n_pops, 0.0);
    nat_pops_e.push_back(std::move(lead));
}

namespace {
std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
} // namespace

void InfoTrace::write_csv(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("InfoTrace::write_csv: cannot open " + path);
    f << "time_fs,S_e_vN,S_N_vN,S_e_given_N,S_N_given_e,S_ee_given_N,S_eN_given_e,"
         "S_e_Sh,S_N_Sh,S_ee_Sh,S_eN_Sh,I_ee_vN,I_eN_vN,I_ee_Sh,I_eN_Sh,"
         "z_e_mean,z_e_disp,R_mean,R_disp,norm\n";
    for (const auto& r : rows) {
        f << fmt(r.t_fs) << ',' << fmt(r.S_e_vN) << ',' << fmt(r.S_N_vN) << ','
          << fmt(r.S_e_given_N) << ',' << fmt(r.S_N_given_e) << ',' << fmt(r.S_ee_given_N) << ','
          << fmt(r.S_eN_given_e) << ',' << fmt(r.S_e_Sh) << ',' << fmt(r.S_N_Sh) << ','
          << fmt(r.S_ee_Sh) << ',' << fmt(r.S_eN_Sh) << ',' << fmt(r.I_ee_vN) << ','
          << fmt(r.I_eN_vN) << ',' << fmt(r.I_ee_Sh) << ',' << fmt(r.I_eN_Sh) << ','
          << fmt(r.z_e_mean) << ',' << fmt(r.z_e_disp) << ',' << fmt(r.R_mean) << ','
          << fmt(r.R_disp) << ',' << fmt(r.norm) << '\n';
    }
}

void InfoTrace::write_nop_csv(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("InfoTrace::write_nop_csv: cannot open " + path);
    f << "time_fs";
    for (int k = 1; k <= n_pops; ++k) f << ",lambda_" << k;
    f << "\n";
    for (size_t i = 0; i < rows.size(); ++i) {
        f << fmt(rows[i].t_fs);
        for (double v : nat_pops_e[i]) f << ',' << fmt(v);
        f << "\n";
    }
}

InfoTrace InfoTrace::read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("InfoTrace::read_csv: cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("InfoTrace::read_csv: empty file");
    InfoTrace tr;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() != 20) throw std::runtime_error("InfoTrace::read_csv: bad row");
        InfoRow r;
        int i = 0;
        r.t_fs = vals[i++]; r.S_e_vN = vals[i++]; r.S_N_vN = vals[i++];
        r.S_e_given_N = vals[i++]; r.S_N_given_e = vals[i++]; r.S_ee_given_N = vals[i++];
        r.S_eN_given_e = vals[i++]; r.S_e_Sh = vals[i++]; r.S_N_Sh = vals[i++];
        r.S_ee_Sh = vals[i++]; r.S_eN_Sh = vals[i++]; r.I_ee_vN = vals[i++];
        r.I_eN_vN = vals[i++]; r.I_ee_Sh = vals[i++]; r.I_eN_Sh = vals[i++];
        r.z_e_mean = vals[i++]; r.z_e_disp = vals[i++]; r.R_mean = vals[i++];
        r.R_disp = vals[i++]; r.norm = vals[i++];
        tr.rows.push_back(r);
        tr.nat_pops_e.emplace_back();
    }
    return tr;
}

namespace {

// interior extremum with 3-point parabolic refinement; comp(a,b) true when a
// is "more extreme" than b. Ties resolve to the earliest time.
template <class Comp>
double refined_extremum(const InfoTrace& trace, double t_be, double t_af,
                        double (*field)(const InfoRow&), Comp comp) {
    const auto& rows = trace.rows;
    int ib = -1, ia = -1;
    for (size_t i = 0; i < rows.size(); ++i) {
        if (ib < 0 && rows[i].t_fs >= t_be - 1e-12) ib = static_cast<int>(i);
        if (rows[i].t_fs <= t_af + 1e-12) ia = static_cast<int>(i);
    }
    if (ib < 0 || ia < 0 || ia <= ib) throw std::runtime_error("collision window outside trace");
    int best = ib;
    for (int i = ib + 1; i <= ia; ++i)
        if (comp(field(rows[i]), field(rows[best]))) best = i;
    if (best == ib || best == ia) throw std::runtime_error("window too small");
    const double y0 = field(rows[best - 1]), y1 = field(rows[best]), y2 = field(rows[best + 1]);
    const double t0 = rows[best - 1].t_fs, t1 = rows[best].t_fs, t2 = rows[best + 1].t_fs;
    // quadratic through three (possibly nonuniform) points
    const double d0 = (y0 - y1) / (t0 - t1), d1 = (y2 - y1) / (t2 - t1);
    const double a = (d1 - d0) / (t2 - t0);
    if (a == 0.0) return t1;
    const double tv = 0.5 * (t0 + t2 + (d0 * (t2 - t1) - d1 * (t0 - t1)) / (a * (t2 - t0)));
    // fall back to the grid point if refinement leaves the bracket
    if (tv < t0 || tv > t2) return t1;
    return tv;
}

} // namespace

CollisionTimes estimate_collision_times(const InfoTrace& trace, double t_be_fs, double t_af_fs) {
    CollisionTimes ct;
    ct.t_S = refined_extremum(trace, t_be_fs, t_af_fs,
                              [](const InfoRow& r) { return r.S_e_vN; },
                              [](double a, double b) { return a > b; });
    ct.t_disp = refined_extremum(trace, t_be_fs, t_af_fs,
                                 [](const InfoRow& r) { return r.z_e_disp; },
                                 [](double a, double b) { return a < b; });
    ct.t_I = refined_extremum(trace, t_be_fs, t_af_fs,
                              [](const InfoRow& r) { return r.I_ee_Sh; },
                              [](double a, double b) { return a < b; });
    return ct;
}

namespace {
double interp_S_e(const InfoTrace& trace, double t_fs) {
    const auto& rows = trace.rows;
    if (rows.empty() || t_fs < rows.front().t_fs - 1e-9 || t_fs > rows.back().t_fs + 1e-9)
        throw std::runtime_error("entanglement_retention: time outside trace");
    for (size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].t_fs >= t_fs) {
            const double f = (t_fs - rows[i - 1].t_fs) / (rows[i].t_fs - rows[i - 1].t_fs);
            return rows[i - 1].S_e_vN * (1.0 - f) + rows[i].S_e_vN * f;
        }
    }
    return rows.back().S_e_vN;
}
} // namespace

Retention entanglement_retention(const InfoTrace& trace, double t_col_fs, double delta_t_fs) {
    const double s_col = interp_S_e(trace, t_col_fs);
    if (!(std::abs(s_col) > 1e-12)) throw std::runtime_error("entanglement_retention: S_e(t_col) ~ 0");
    return Retention{interp_S_e(trace, t_col_fs - delta_t_fs) / s_col,
                     interp_S_e(trace, t_col_fs + delta_t_fs) / s_col};
}

} // namespace icec
