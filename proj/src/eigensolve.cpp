#include "icecsim/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace icec {

namespace {

struct FemMatrices {
    SymTridiag h; // kinetic + potential, interior nodes
    SymTridiag m; // consistent mass
    double v_min = 0.0;
};

// 3-point Gauss nodes/weights on [0,1]
constexpr double kG1 = 0.11270166537925831148;
constexpr double kG2 = 0.5;
constexpr double kG3 = 0.88729833462074168852;
constexpr double kW1 = 5.0 / 18.0, kW2 = 8.0 / 18.0, kW3 = 5.0 / 18.0;

FemMatrices assemble(const Grid1D& grid, const std::function<double(double)>& pot, double mass) {
    if (grid.boundary != Boundary::dirichlet)
        throw std::invalid_argument("solve_tise_1d: needs a Dirichlet grid");
    const int n = grid.n;
    const int m = n - 2;
    const double h = grid.spacing;
    FemMatrices out;
    out.h.diag = Eigen::VectorXd::Zero(m);
    out.h.off = Eigen::VectorXd::Zero(m - 1);
    out.m.diag = Eigen::VectorXd::Zero(m);
    out.m.off = Eigen::VectorXd::Zero(m - 1);

    const double kin = 1.0 / (2.0 * mass * h);
    out.v_min = std::numeric_limits<double>::infinity();

    // element e spans grid nodes e, e+1; interior dof index = node - 1
    for (int e = 0; e < n - 1; ++e) {
        const double xa = grid.points[e];
        double p11 = 0.0, p12 = 0.0, p22 = 0.0;
        const double gt[3] = {kG1, kG2, kG3};
        const double gw[3] = {kW1, kW2, kW3};
        for (int g = 0; g < 3; ++g) {
            const double t = gt[g];
            const double v = pot(xa + t * h);
            out.v_min = std::min(out.v_min, v);
            const double w = gw[g] * h * v;
            p11 += w * (1.0 - t) * (1.0 - t);
            p12 += w * (1.0 - t) * t;
            p22 += w * t * t;
        }
        const int a = e - 1;
        const int b = e;
        if (a >= 0) {
            out.h.diag[a] += kin + p11;
            out.m.diag[a] += h / 3.0;
        }
        if (b < m) {
            out.h.diag[b] += kin + p22;
            out.m.diag[b] += h / 3.0;
        }
        if (a >= 0 && b < m) {
            out.h.off[a] += -kin + p12;
            out.m.off[a] += h / 6.0;
        }
    }
    return out;
}

// Number of eigenvalues of the pencil (H, M) strictly below lambda: negative
// pivots of the LDL^T factorization of H - lambda M.
int sturm_count(const FemMatrices& fem, double lambda) {
    const int m = fem.h.size();
    int count = 0;
    double d = 0.0;
    for (int i = 0; i < m; ++i) {
        double di = fem.h.diag[i] - lambda * fem.m.diag[i];
        if (i > 0) {
            const double off = fem.h.off[i - 1] - lambda * fem.m.off[i - 1];
            di -= off * off / d;
        }
        if (di == 0.0) di = -1e-300;
        if (di < 0.0) ++count;
        d = di;
    }
    return count;
}

// Tridiagonal LU with partial pivoting for (H - sigma M); row swaps confined
// to adjacent rows, standard three-band storage plus a fill band.
struct PivotedTridiagLU {
    int n = 0;
    std::vector<double> dl, dd, du, du2;
    std::vector<int> piv;

    void factor(const FemMatrices& fem, double sigma) {
        n = fem.h.size();
        dl.assign(n, 0.0);
        dd.assign(n, 0.0);
        du.assign(n, 0.0);
        du2.assign(n, 0.0);
        piv.assign(n, 0);
        for (int i = 0; i < n; ++i) dd[i] = fem.h.diag[i] - sigma * fem.m.diag[i];
        for (int i = 0; i + 1 < n; ++i) {
            const double o = fem.h.off[i] - sigma * fem.m.off[i];
            dl[i] = o; // subdiagonal entry (row i+1, col i)
            du[i] = o; // superdiagonal entry (row i, col i+1)
        }
        for (int i = 0; i + 1 < n; ++i) {
            if (std::abs(dd[i]) >= std::abs(dl[i])) {
                piv[i] = 0;
                if (dd[i] == 0.0) dd[i] = 1e-300;
                const double mult = dl[i] / dd[i];
                dl[i] = mult;
                dd[i + 1] -= mult * du[i];
            } else {
                piv[i] = 1;
                const double mult = dd[i] / dl[i];
                std::swap(dd[i], dl[i]);
                const double tmp = du[i];
                du[i] = dd[i + 1];
                du2[i] = i + 2 < n ? du[i + 1] : 0.0;
                dd[i + 1] = tmp - mult * du[i];
                if (i + 2 < n) du[i + 1] = -mult * du2[i];
                dl[i] = mult;
            }
        }
        if (dd[n - 1] == 0.0) dd[n - 1] = 1e-300;
    }

    void solve(Eigen::VectorXd& b) const {
        for (int i = 0; i + 1 < n; ++i) {
            if (piv[i]) std::swap(b[i], b[i + 1]);
            b[i + 1] -= dl[i] * b[i];
        }
        for (int i = n - 1; i >= 0; --i) {
            double v = b[i];
            if (i + 1 < n) v -= du[i] * b[i + 1];
            if (i + 2 < n) v -= du2[i] * b[i + 2];
            b[i] = v / dd[i];
        }
    }
};

EigenSolution finalize(const Grid1D& grid, const FemMatrices& fem, double tol,
                       std::vector<std::pair<double, Eigen::VectorXd>> pairs, int n_eigen) {
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    if (static_cast<int>(pairs.size()) > n_eigen) pairs.resize(n_eigen);

    EigenSolution sol;
    sol.grid = grid;
    const int m = fem.h.size();
    sol.states = Eigen::MatrixXd::Zero(grid.n, static_cast<int>(pairs.size()));
    Eigen::VectorXd hc, mc;
    int idx = 0;
    int conv = 0;
    for (auto& [e, c] : pairs) {
        fem.m.multiply(c, mc);
        const double mnorm = std::sqrt(c.dot(mc));
        c /= mnorm;
        fem.h.multiply(c, hc);
        fem.m.multiply(c, mc);
        const double res = (hc - e * mc).norm() / c.norm();
        int imax = 0;
        for (int i = 1; i < m; ++i)
            if (std::abs(c[i]) > std::abs(c[imax])) imax = i;
        if (c[imax] < 0.0) c = -c;
        sol.energies.push_back(e);
        sol.residual_norms.push_back(res);
        if (res <= tol * std::max(1.0, std::abs(e))) ++conv;
        sol.states.block(1, idx, m, 1) = c;
        ++idx;
    }
    sol.n_converged = conv;
    if (conv < static_cast<int>(pairs.size())) {
        std::ostringstream os;
        os << "solve_tise_1d: only " << conv << " of " << pairs.size()
           << " requested pairs reached residual tolerance " << tol;
        throw EigensolveError(os.str(), conv);
    }
    return sol;
}

} // namespace

double EigenSolution::mass_inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    const double h = grid.spacing;
    double acc = 0.0;
    for (int i = 1; i + 1 < grid.n; ++i) {
        acc += u[i] * (2.0 * h / 3.0) * v[i];
        if (i + 2 < grid.n) acc += (u[i] * v[i + 1] + u[i + 1] * v[i]) * (h / 6.0);
    }
    return acc;
}

EigenSolution solve_tise_1d(const Grid1D& grid, const std::function<double(double)>& potential,
                            double mass, int n_eigen, const TiseOptions& opt) {
    if (n_eigen < 1) throw std::invalid_argument("solve_tise_1d: n_eigen must be >= 1");
    if (n_eigen >= grid.n / 2)
        throw std::invalid_argument("solve_tise_1d: n_eigen must be below n_points/2");
    if (!(mass > 0.0)) throw std::invalid_argument("solve_tise_1d: mass must be positive");

    const FemMatrices fem = assemble(grid, potential, mass);
    const int m = fem.h.size();

    std::vector<std::pair<double, Eigen::VectorXd>> pairs;

    if (opt.force_dense) {
        TridiagCholesky chol;
        if (!chol.factor(fem.m))
            throw EigensolveError("solve_tise_1d: mass matrix not positive definite", 0);
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
        for (int j = 0; j < m; ++j) {
            a(j, j) = fem.h.diag[j];
            if (j + 1 < m) a(j, j + 1) = a(j + 1, j) = fem.h.off[j];
        }
        Eigen::VectorXd col(m);
        for (int j = 0; j < m; ++j) {
            col = a.col(j);
            chol.forward(col);
            a.col(j) = col;
        }
        for (int i = 0; i < m; ++i) {
            col = a.row(i).transpose();
            chol.forward(col);
            a.row(i) = col.transpose();
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
        if (es.info() != Eigen::Success) throw EigensolveError("solve_tise_1d: dense solve failed", 0);
        for (int k = 0; k < n_eigen; ++k) {
            Eigen::VectorXd c = es.eigenvectors().col(k);
            chol.backward(c);
            pairs.emplace_back(es.eigenvalues()(k), std::move(c));
        }
        return finalize(grid, fem, opt.tol, std::move(pairs), n_eigen);
    }

    // Sturm bisection for the lowest n_eigen eigenvalues of the pencil,
    // then shift-invert (inverse) iteration with a pivoted tridiagonal
    // factorization for the vectors.
    double lo = fem.v_min - 2.0;
    for (int guard = 0; sturm_count(fem, lo) > 0; ++guard) {
        if (guard > 80) throw EigensolveError("solve_tise_1d: no lower spectral bound found", 0);
        lo -= std::max(2.0, std::abs(lo));
    }
    double hi = fem.v_min + 1.0;
    for (int guard = 0; sturm_count(fem, hi) < n_eigen; ++guard) {
        if (guard > 200) throw EigensolveError("solve_tise_1d: upper bound search failed", 0);
        hi += std::max(1.0, 0.5 * std::abs(hi));
    }

    std::vector<double> evals(n_eigen);
    for (int j = 0; j < n_eigen; ++j) {
        double a = lo, b = hi;
        while (b - a > 1e-14 * std::max({1.0, std::abs(a), std::abs(b)})) {
            const double mid = 0.5 * (a + b);
            if (sturm_count(fem, mid) > j)
                b = mid;
            else
                a = mid;
        }
        evals[j] = 0.5 * (a + b);
    }

    // inverse iteration; orthogonalize in the M inner product against all
    // previously accepted vectors so clustered pairs stay orthogonal
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<Eigen::VectorXd> accepted;
    Eigen::VectorXd mx, work;
    PivotedTridiagLU lu;
    for (int j = 0; j < n_eigen; ++j) {
        const double scale = std::max(1.0, std::abs(evals[j]));
        lu.factor(fem, evals[j] + 1e-13 * scale);
        Eigen::VectorXd x(m);
        for (int i = 0; i < m; ++i) x[i] = uni(rng);
        for (int it = 0; it < 6; ++it) {
            lu.solve(x);
            for (const auto& prev : accepted) {
                fem.m.multiply(prev, mx);
                x -= prev * x.dot(mx);
            }
            fem.m.multiply(x, mx);
            const double nrm = std::sqrt(x.dot(mx));
            if (!(nrm > 0.0)) break;
            x /= nrm;
            // good enough? residual check against the bisection eigenvalue
            fem.h.multiply(x, work);
            fem.m.multiply(x, mx);
            if ((work - evals[j] * mx).norm() <= 0.25 * opt.tol * scale * x.norm()) break;
        }
        accepted.push_back(x);
        // Rayleigh quotient sharpens the bisected value
        fem.h.multiply(x, work);
        fem.m.multiply(x, mx);
        const double rq = x.dot(work) / x.dot(mx);
        pairs.emplace_back(rq, x);
    }
    return finalize(grid, fem, opt.tol, std::move(pairs), n_eigen);
}

EigenSolution solve_tise_1d(const Grid1D& grid, const std::vector<double>& potential_nodes,
                            double mass, int n_eigen, const TiseOptions& opt) {
    if (static_cast<int>(potential_nodes.size()) != grid.n)
        throw std::invalid_argument("solve_tise_1d: potential sample count != grid points");
    const Grid1D* g = &grid;
    const std::vector<double>* v = &potential_nodes;
    auto pot = [g, v](double x) {
        const double t = (x - g->xmin) / g->spacing;
        int e = static_cast<int>(std::floor(t));
        e = std::clamp(e, 0, g->n - 2);
        const double f = t - e;
        return (*v)[e] * (1.0 - f) + (*v)[e + 1] * f;
    };
    return solve_tise_1d(grid, pot, mass, n_eigen, opt);
}

RefineResult refine_until(double xmin, double xmax, const std::function<double(double)>& potential,
                          double mass, int n_eigen, double energy_tol,
                          int initial_points, int max_points, const TiseOptions& opt) {
    if (!(energy_tol > 0.0)) throw std::invalid_argument("refine_until: energy_tol must be positive");
    RefineResult out;
    int n = initial_points;
    EigenSolution prev = solve_tise_1d(Grid1D::dirichlet(xmin, xmax, n), potential, mass, n_eigen, opt);
    out.history.push_back({n, prev.energies[0]});
    for (;;) {
        const int next = 2 * n - 1; // halves the spacing
        if (next > max_points) {
            std::ostringstream os;
            os << "refine_until: cap of " << max_points << " points reached; history:";
            for (const auto& s : out.history) os << " (" << s.n_points << ", " << s.ground_energy << ")";
            throw EigensolveError(os.str(), 0);
        }
        EigenSolution fine = solve_tise_1d(Grid1D::dirichlet(xmin, xmax, next), potential, mass, n_eigen, opt);
        out.history.push_back({next, fine.energies[0]});
        const double delta = std::abs(fine.energies[0] - prev.energies[0]);
        prev = std::move(fine);
        n = next;
        if (delta < energy_tol) break;
    }
    out.solution = std::move(prev);
    return out;
}

int count_nodes(const Eigen::VectorXd& state, double rel_eps) {
    const double floor = rel_eps * state.cwiseAbs().maxCoeff();
    int changes = 0;
    double last = 0.0;
    for (int i = 0; i < state.size(); ++i) {
        const double v = state[i];
        if (std::abs(v) <= floor) continue;
        if (last != 0.0 && ((v > 0) != (last > 0))) ++changes;
        last = v;
    }
    return changes;
}

} // namespace icec
