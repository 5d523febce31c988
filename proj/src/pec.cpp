#include "icecsim/pec.hpp"

#include "icecsim/spline.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace icec {

PecTable scan_pec(const ModelParams& params, const std::vector<double>& R_grid, int n_curves,
                  const Grid1D& electronic_grid, const PecScanOptions& opt) {
    params.validate();
    if (n_curves < 3) throw std::invalid_argument("scan_pec: n_curves must be >= 3");
    for (double r : R_grid)
        if (!(r > 0.0)) throw std::invalid_argument("scan_pec: all R must be positive");
    if (!std::is_sorted(R_grid.begin(), R_grid.end()))
        throw std::invalid_argument("scan_pec: R_grid must ascend");

    const int nR = static_cast<int>(R_grid.size());
    PecTable table;
    table.R_grid = R_grid;
    table.electronic_grid = electronic_grid;
    table.curves.assign(n_curves, std::vector<double>(nR, 0.0));
    if (opt.store_states)
        table.states.assign(n_curves, std::vector<Eigen::VectorXd>(nR));
    table.states_stored = opt.store_states;

    std::atomic<bool> failed{false};
    std::string fail_msg;
#pragma omp parallel for schedule(dynamic) num_threads(opt.threads > 0 ? opt.threads : omp_get_max_threads())
    for (int i = 0; i < nR; ++i) {
        if (failed.load()) continue;
        const double R = R_grid[i];
        try {
            auto v = [&](double z) { return ion_potential(z, R, params); };
            EigenSolution sol = solve_tise_1d(electronic_grid, v, 1.0, n_curves, opt.tise);
            for (int n = 0; n < n_curves; ++n) {
                table.curves[n][i] = sol.energies[n];
                if (opt.store_states) {
                    Eigen::VectorXd st = sol.states.col(n);
                    // normalize under the diagonal grid quadrature
                    double nrm = 0.0;
                    for (int j = 0; j < electronic_grid.n; ++j)
                        nrm += electronic_grid.weights[j] * st[j] * st[j];
                    st /= std::sqrt(nrm);
                    table.states[n][i] = std::move(st);
                }
            }
        } catch (const std::exception& e) {
#pragma omp critical
            {
                if (!failed.exchange(true)) {
                    std::ostringstream os;
                    os << "scan_pec: solve failed at R = " << R << ": " << e.what();
                    fail_msg = os.str();
                }
            }
        }
    }
    if (failed.load()) throw std::runtime_error(fail_msg);

    // phase fixing: make <xi_n(R_i)|xi_n(R_{i+1})> positive, sweeping left to right
    if (opt.store_states) {
        for (int n = 0; n < n_curves; ++n) {
            for (int i = 1; i < nR; ++i) {
                double overlap = 0.0;
                const Eigen::VectorXd& a = table.states[n][i - 1];
                Eigen::VectorXd& b = table.states[n][i];
                for (int j = 0; j < electronic_grid.n; ++j)
                    overlap += electronic_grid.weights[j] * a[j] * b[j];
                if (overlap < 0.0) b = -b;
            }
        }
    }
    return table;
}

PecDerived derive_thresholds(const PecTable& table) {
    const auto& e0 = table.curves.at(0);
    const int nR = static_cast<int>(e0.size());
    int imin = 0;
    for (int i = 1; i < nR; ++i)
        if (e0[i] < e0[imin]) imin = i;
    if (imin == 0 || imin == nR - 1) throw std::runtime_error("unbound ground curve");

    PecDerived out;
    const double dl = table.R_grid[imin] - table.R_grid[imin - 1];
    const double dr = table.R_grid[imin + 1] - table.R_grid[imin];
    // 3-point parabolic refinement (uniform spacing assumed near the minimum)
    const double y0 = e0[imin - 1], y1 = e0[imin], y2 = e0[imin + 1];
    const double h = 0.5 * (dl + dr);
    const double denom = y0 - 2.0 * y1 + y2;
    double shift = 0.0;
    if (denom > 0.0) shift = 0.5 * h * (y0 - y2) / denom;
    out.R_eq = table.R_grid[imin] + shift;

    // curvature from a parabolic fit over a +-0.25 a.u. window; single-point
    // second differences are dominated by grid-alignment noise of the solves
    const double wlo = out.R_eq - 0.25, whi = out.R_eq + 0.25;
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, t0 = 0, t1 = 0, t2 = 0;
    for (int i = 0; i < nR; ++i) {
        const double x = table.R_grid[i] - out.R_eq;
        if (table.R_grid[i] < wlo || table.R_grid[i] > whi) continue;
        const double y = e0[i];
        s0 += 1; s1 += x; s2 += x * x; s3 += x * x * x; s4 += x * x * x * x;
        t0 += y; t1 += x * y; t2 += x * x * y;
    }
    Eigen::Matrix3d a;
    a << s0, s1, s2, s1, s2, s3, s2, s3, s4;
    Eigen::Vector3d b(t0, t1, t2);
    Eigen::Vector3d coef = a.fullPivLu().solve(b);
    out.curvature = 2.0 * coef[2];

    // gaps at the grid point nearest the refined minimum
    int inear = imin;
    double best = std::abs(table.R_grid[imin] - out.R_eq);
    for (int i = std::max(0, imin - 2); i < std::min(nR, imin + 3); ++i) {
        const double d = std::abs(table.R_grid[i] - out.R_eq);
        if (d < best) { best = d; inear = i; }
    }
    out.eps0_at_Req = e0[inear];
    if (table.n_curves() > 1) out.delta_eps_01 = table.curves[1][inear] - e0[inear];
    if (table.n_curves() > 2) out.delta_eps_02 = table.curves[2][inear] - e0[inear];
    if (out.delta_eps_01 > out.delta_eps_02)
        throw std::runtime_error("derive_thresholds: gap ordering violated");

    for (const auto& curve : table.curves) out.dissociation_limits.push_back(curve.back());
    return out;
}

EigenSolution vibrational_states(const std::vector<double>& R_samples,
                                 const std::vector<double>& curve, double m_red, int n_states,
                                 int grid_points) {
    if (R_samples.size() != curve.size() || R_samples.size() < 8)
        throw std::invalid_argument("vibrational_states: bad curve sampling");
    CubicSpline spl(R_samples, curve);
    const double rmin = R_samples.front(), rmax = R_samples.back();
    const Grid1D grid = Grid1D::dirichlet(rmin, rmax, grid_points);
    TiseOptions topt;
    topt.tol = 1e-8;
    EigenSolution sol = solve_tise_1d(grid, [&](double r) { return spl(r); }, m_red, n_states, topt);

    // keep only states bound below the dissociation limit (curve value at R_max)
    const double dis = curve.back();
    int keep = 0;
    while (keep < static_cast<int>(sol.energies.size()) && sol.energies[keep] < dis) ++keep;
    sol.energies.resize(keep);
    sol.residual_norms.resize(keep);
    sol.states.conservativeResize(Eigen::NoChange, keep);
    sol.n_converged = keep;
    return sol;
}

void write_pec_csv(const PecTable& table, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_pec_csv: cannot open " + path);
    f << "R";
    for (int n = 0; n < table.n_curves(); ++n) f << ",eps_" << n;
    f << "\n";
    char buf[32];
    for (size_t i = 0; i < table.R_grid.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", table.R_grid[i]);
        f << buf;
        for (int n = 0; n < table.n_curves(); ++n) {
            std::snprintf(buf, sizeof buf, "%.17g", table.curves[n][i]);
            f << "," << buf;
        }
        f << "\n";
    }
}

} // namespace icec
