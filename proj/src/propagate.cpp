#include "icecsim/propagate.hpp"

#include "icecsim/lanczos.hpp"
#include "icecsim/transforms.hpp"
#include "icecsim/units.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace icec {

namespace {

constexpr double kPi = 3.14159265358979323846;

// FFT wavenumbers in standard order: 0, 1, ..., n/2-1, -n/2, ..., -1 (times 2pi/L)
std::vector<double> fft_wavenumbers(const Grid1D& g) {
    std::vector<double> k(g.n);
    const double dk = 2.0 * kPi / g.length();
    for (int j = 0; j < g.n; ++j) {
        const int jj = j <= g.n / 2 - 1 ? j : j - g.n;
        k[j] = dk * jj;
    }
    return k;
}

// sine-basis wavenumbers for the interior modes of a Dirichlet grid
std::vector<double> dst_wavenumbers(const Grid1D& g) {
    std::vector<double> k(g.n - 2);
    const double dk = kPi / g.length();
    for (int m = 1; m <= g.n - 2; ++m) k[m - 1] = dk * m;
    return k;
}

} // namespace

std::vector<std::complex<double>> cap_profile(const Grid1D& axis, const CapSpec& spec, CapAxis which) {
    if (!(spec.eta > 0.0)) throw std::invalid_argument("cap_profile: eta must be positive");
    std::vector<std::complex<double>> w(axis.n, {0.0, 0.0});
    if (which == CapAxis::electronic) {
        if (spec.z_cap <= axis.xmin || spec.z_cap >= axis.xmax
            || -spec.z_cap <= axis.xmin || -spec.z_cap >= axis.xmax)
            throw std::invalid_argument("cap_profile: electronic onset outside the domain");
        for (int i = 0; i < axis.n; ++i) {
            const double z = axis.points[i];
            double v = 0.0;
            if (spec.electronic_right && z > spec.z_cap) v += (z - spec.z_cap) * (z - spec.z_cap);
            if (spec.electronic_left && z < -spec.z_cap) v += (z + spec.z_cap) * (z + spec.z_cap);
            w[i] = std::complex<double>(0.0, -spec.eta * v);
        }
    } else {
        if (spec.r_cap <= axis.xmin || spec.r_cap >= axis.xmax)
            throw std::invalid_argument("cap_profile: nuclear onset outside the domain");
        for (int i = 0; i < axis.n; ++i) {
            const double r = axis.points[i];
            if (spec.nuclear && r > spec.r_cap)
                w[i] = std::complex<double>(0.0, -spec.eta * (r - spec.r_cap) * (r - spec.r_cap));
        }
    }
    return w;
}

void ProjectileSpec::validate() const {
    if (!(epsilon_in > 0.0)) throw std::invalid_argument("ProjectileSpec: epsilon_in must be positive");
    if (!(delta_epsilon > 0.0)) throw std::invalid_argument("ProjectileSpec: delta_epsilon must be positive");
    if (!(2.0 * delta_epsilon * delta_epsilon < 4.0 * epsilon_in * epsilon_in))
        throw std::invalid_argument("ProjectileSpec: delta_epsilon too large for epsilon_in");
    if (direction != 1 && direction != -1) throw std::invalid_argument("ProjectileSpec: direction must be +-1");
}

double ProjectileSpec::sigma_p() const {
    validate();
    const double s = 2.0 * epsilon_in
                   - std::sqrt(4.0 * epsilon_in * epsilon_in - 2.0 * delta_epsilon * delta_epsilon);
    return std::sqrt(s);
}

double ProjectileSpec::p0() const {
    const double sp = sigma_p();
    return direction * std::sqrt(2.0 * epsilon_in - sp * sp);
}

// ---------------------------------------------------------------------------
// 2D spectral machinery shared by relax_target and the direct oracle
// ---------------------------------------------------------------------------

namespace {

struct Spectral2D {
    Grid1D ge, gr;
    std::vector<double> pot;      // V(z,R) on the full 2D grid
    std::vector<double> kz2, kr2; // k^2 arrays
    std::vector<std::complex<double>> buf;
    FftPlan fz_fwd, fz_bwd, dst;
    double v_min = 0.0;

    Spectral2D(const ModelParams& p, const Grid1D& grid_e, const Grid1D& grid_R) : ge(grid_e), gr(grid_R) {
        if (ge.boundary != Boundary::periodic)
            throw std::invalid_argument("relax/oracle: electronic grid must be periodic");
        if (gr.boundary != Boundary::dirichlet)
            throw std::invalid_argument("relax/oracle: nuclear grid must be Dirichlet");
        pot.resize(static_cast<size_t>(ge.n) * gr.n);
        v_min = std::numeric_limits<double>::infinity();
        for (int i = 0; i < ge.n; ++i)
            for (int j = 0; j < gr.n; ++j) {
                const double v = ion_potential(ge.points[i], gr.points[j], p);
                pot[static_cast<size_t>(i) * gr.n + j] = v;
                v_min = std::min(v_min, v);
            }
        auto kz = fft_wavenumbers(ge);
        kz2.resize(kz.size());
        for (size_t i = 0; i < kz.size(); ++i) kz2[i] = kz[i] * kz[i];
        auto kr = dst_wavenumbers(gr);
        kr2.resize(kr.size());
        for (size_t i = 0; i < kr.size(); ++i) kr2[i] = kr[i] * kr[i];
        buf.resize(pot.size());
        fz_fwd = plan_fft_axis0(buf.data(), ge.n, gr.n, FFTW_FORWARD);
        fz_bwd = plan_fft_axis0(buf.data(), ge.n, gr.n, FFTW_BACKWARD);
        dst = plan_dst_last_axis(buf.data(), ge.n, gr.n);
    }

    // out = H x (exact grid Hamiltonian, no splitting); x, out full-size
    void apply_h(const std::vector<std::complex<double>>& x, std::vector<std::complex<double>>& out,
                 double m_red) {
        const size_t n = pot.size();
        out.resize(n);
        // electronic kinetic
        std::copy(x.begin(), x.end(), buf.begin());
        fz_fwd.execute();
        for (int i = 0; i < ge.n; ++i) {
            const double f = 0.5 * kz2[i] / ge.n;
            for (int j = 0; j < gr.n; ++j) buf[static_cast<size_t>(i) * gr.n + j] *= f;
        }
        fz_bwd.execute();
        for (size_t i = 0; i < n; ++i) out[i] = buf[i];
        // nuclear kinetic
        std::copy(x.begin(), x.end(), buf.begin());
        dst.execute();
        const double dstn = 1.0 / (2.0 * (gr.n - 1));
        for (int i = 0; i < ge.n; ++i)
            for (int j = 1; j + 1 < gr.n; ++j)
                buf[static_cast<size_t>(i) * gr.n + j] *= 0.5 * kr2[j - 1] / m_red * dstn;
        dst.execute();
        for (int i = 0; i < ge.n; ++i) {
            buf[static_cast<size_t>(i) * gr.n] = 0.0;
            buf[static_cast<size_t>(i) * gr.n + gr.n - 1] = 0.0;
        }
        for (size_t i = 0; i < n; ++i) out[i] += buf[i] + pot[i] * x[i];
    }

    double weight(int i, int j) const { return ge.weights[i] * gr.weights[j]; }

    double inner(const std::vector<std::complex<double>>& a,
                 const std::vector<std::complex<double>>& b) const {
        double acc = 0.0;
        for (int i = 0; i < ge.n; ++i) {
            double row = 0.0;
            for (int j = 0; j < gr.n; ++j) {
                const size_t idx = static_cast<size_t>(i) * gr.n + j;
                row += gr.weights[j] * (a[idx].real() * b[idx].real() + a[idx].imag() * b[idx].imag());
            }
            acc += ge.weights[i] * row;
        }
        return acc;
    }
};

} // namespace

RelaxResult relax_target(const ModelParams& params, const Grid1D& grid_e, const Grid1D& grid_R,
                         const std::vector<double>& seed, const RelaxOptions& opt) {
    params.validate();
    fft_init(opt.threads);
    Spectral2D sp(params, grid_e, grid_R);
    const size_t n = sp.pot.size();
    if (seed.size() != n) throw std::invalid_argument("relax_target: seed size mismatch");

    RelaxResult out;
    out.grid_e = grid_e;
    out.grid_R = grid_R;
    out.state.assign(seed.begin(), seed.end());
    // Dirichlet boundaries of the R axis carry no amplitude
    for (int i = 0; i < grid_e.n; ++i) {
        out.state[static_cast<size_t>(i) * grid_R.n] = 0.0;
        out.state[static_cast<size_t>(i) * grid_R.n + grid_R.n - 1] = 0.0;
    }
    const double n0 = sp.inner(out.state, out.state);
    if (!(n0 > 0.0)) throw std::invalid_argument("relax_target: zero seed");
    for (auto& v : out.state) v /= std::sqrt(n0);

    std::vector<std::complex<double>> hpsi;
    auto energy_of = [&](const std::vector<std::complex<double>>& s) {
        sp.apply_h(s, hpsi, params.m_red());
        return sp.inner(s, hpsi) / sp.inner(s, s);
    };

    double dtau = opt.dtau;
    if (!(dtau > 0.0)) throw std::invalid_argument("relax_target: dtau must be positive");
    int halvings_done = 0;

    std::vector<double> halfpot(n), kinz(grid_e.n), kinr(grid_R.n - 2);
    auto rebuild = [&]() {
        for (size_t i = 0; i < n; ++i) halfpot[i] = std::exp(-0.5 * dtau * (sp.pot[i] - sp.v_min));
        for (int i = 0; i < grid_e.n; ++i)
            kinz[i] = std::exp(-0.5 * dtau * sp.kz2[i]) / grid_e.n;
        const double dstn = 1.0 / (2.0 * (grid_R.n - 1));
        for (int j = 0; j + 2 < grid_R.n; ++j)
            kinr[j] = std::exp(-0.5 * dtau * sp.kr2[j] / params.m_red()) * dstn;
    };
    rebuild();

    double e_prev = energy_of(out.state);
    out.energy_history.push_back(e_prev);
    double tau = 0.0;

    while (tau < opt.tau_total) {
        // Strang: half potential, z kinetic, R kinetic, half potential
        for (size_t i = 0; i < n; ++i) sp.buf[i] = out.state[i] * halfpot[i];
        sp.fz_fwd.execute();
        for (int i = 0; i < grid_e.n; ++i)
            for (int j = 0; j < grid_R.n; ++j) sp.buf[static_cast<size_t>(i) * grid_R.n + j] *= kinz[i];
        sp.fz_bwd.execute();
        sp.dst.execute();
        for (int i = 0; i < grid_e.n; ++i)
            for (int j = 1; j + 1 < grid_R.n; ++j)
                sp.buf[static_cast<size_t>(i) * grid_R.n + j] *= kinr[j - 1];
        sp.dst.execute();
        for (int i = 0; i < grid_e.n; ++i) {
            sp.buf[static_cast<size_t>(i) * grid_R.n] = 0.0;
            sp.buf[static_cast<size_t>(i) * grid_R.n + grid_R.n - 1] = 0.0;
        }
        for (size_t i = 0; i < n; ++i) out.state[i] = sp.buf[i] * halfpot[i];

        const double nn = sp.inner(out.state, out.state);
        const double inv = 1.0 / std::sqrt(nn);
        for (auto& v : out.state) v *= inv;
        tau += dtau;

        const double e = energy_of(out.state);
        out.energy_history.push_back(e);
        if (e > e_prev + 1e-10 * std::max(1.0, std::abs(e_prev))) {
            std::ostringstream os;
            os << "relax_target: energy increased (" << e_prev << " -> " << e
               << "); reduce dtau below " << dtau;
            throw std::runtime_error(os.str());
        }
        const bool stationary = std::abs(e - e_prev) < opt.stationary_tol;
        e_prev = e;
        if (stationary) {
            if (halvings_done >= opt.anneal_halvings) break;
            dtau *= 0.5;
            ++halvings_done;
            rebuild();
        }
    }
    if (tau >= opt.tau_total && std::abs(out.energy_history.back() - e_prev) >= opt.stationary_tol)
        throw std::runtime_error("relax_target: tau_total reached before stationarity");

    out.energy = e_prev;
    out.tau_used = tau;
    return out;
}

double target_ground_energy_direct(const ModelParams& params, const Grid1D& grid_e,
                                   const Grid1D& grid_R, double tol) {
    params.validate();
    fft_init(1);
    Spectral2D sp(params, grid_e, grid_R);
    const size_t n = sp.pot.size();
    const double sigma = sp.v_min - 0.5;
    const double m_red = params.m_red();

    using CVec = std::vector<std::complex<double>>;
    CVec r(n), pvec(n), ap(n), sol(n);

    // CG solve (H - sigma) y = b; everything stays real-valued but the
    // transforms run on complex storage.
    auto cg_solve = [&](const CVec& b, CVec& y) {
        std::fill(y.begin(), y.end(), std::complex<double>(0.0, 0.0));
        r = b;
        pvec = r;
        double rr = sp.inner(r, r);
        const double target = tol * tol * rr;
        for (int it = 0; it < 20000 && rr > target; ++it) {
            sp.apply_h(pvec, ap, m_red);
            for (size_t i = 0; i < n; ++i) ap[i] -= sigma * pvec[i];
            const double pap = sp.inner(pvec, ap);
            const double alpha = rr / pap;
            for (size_t i = 0; i < n; ++i) {
                y[i] += alpha * pvec[i];
                r[i] -= alpha * ap[i];
            }
            const double rr_new = sp.inner(r, r);
            const double beta = rr_new / rr;
            rr = rr_new;
            for (size_t i = 0; i < n; ++i) pvec[i] = r[i] + beta * pvec[i];
        }
    };

    // Lanczos on (H - sigma)^-1 in the quadrature inner product, via plain
    // vectors: absorb sqrt(weights) so the Euclidean product matches.
    std::vector<double> sqw(n), isqw(n);
    for (int i = 0; i < grid_e.n; ++i)
        for (int j = 0; j < grid_R.n; ++j) {
            const size_t idx = static_cast<size_t>(i) * grid_R.n + j;
            sqw[idx] = std::sqrt(sp.weight(i, j));
            isqw[idx] = sqw[idx] > 0.0 ? 1.0 / sqw[idx] : 0.0;
        }
    CVec b(n), y(n);
    auto apply = [&](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
        for (size_t i = 0; i < n; ++i) b[i] = x[static_cast<Eigen::Index>(i)] * isqw[i];
        // keep Dirichlet boundaries of R clean
        for (int i = 0; i < grid_e.n; ++i) {
            b[static_cast<size_t>(i) * grid_R.n] = 0.0;
            b[static_cast<size_t>(i) * grid_R.n + grid_R.n - 1] = 0.0;
        }
        cg_solve(b, y);
        out.resize(static_cast<Eigen::Index>(n));
        for (size_t i = 0; i < n; ++i) out[static_cast<Eigen::Index>(i)] = y[i].real() * sqw[i];
    };

    LanczosOptions lopt;
    lopt.n_eigen = 1;
    lopt.max_subspace = 40;
    lopt.tol = 1e-12;
    LanczosResult lr = lanczos_largest(apply, static_cast<int>(n), lopt);
    if (lr.n_converged < 1) throw std::runtime_error("target_ground_energy_direct: Lanczos failed");
    return sigma + 1.0 / lr.values[0];
}

InitialStateResult build_initial_state(const RelaxResult& target, const ProjectileSpec& projectile,
                                       ExchangeSymmetry symmetry) {
    projectile.validate();
    const Grid1D& ge = target.grid_e;
    const Grid1D& gr = target.grid_R;
    const size_t n2d = static_cast<size_t>(ge.n) * gr.n;
    if (target.state.size() != n2d) throw std::invalid_argument("build_initial_state: bad target");

    InitialStateResult out;
    out.psi.grid = Grid3D(ge, gr);
    out.psi.symmetry = symmetry;
    out.psi.time = 0.0;

    // projectile packet, normalized under the grid quadrature
    const double p0 = projectile.p0();
    const double sz = projectile.sigma_z();
    std::vector<std::complex<double>> phi(ge.n);
    double pn = 0.0;
    for (int i = 0; i < ge.n; ++i) {
        const double z = ge.points[i] - projectile.z0;
        const double envelope = std::exp(-z * z / (4.0 * sz * sz));
        phi[i] = std::polar(envelope, p0 * z);
        pn += ge.weights[i] * envelope * envelope;
    }
    const double pinv = 1.0 / std::sqrt(pn);
    for (auto& v : phi) v *= pinv;

    // normalized target (real storage)
    std::vector<double> tgt(n2d);
    double tn = 0.0;
    for (int i = 0; i < ge.n; ++i)
        for (int j = 0; j < gr.n; ++j) {
            const size_t idx = static_cast<size_t>(i) * gr.n + j;
            tgt[idx] = target.state[idx].real();
            tn += ge.weights[i] * gr.weights[j] * tgt[idx] * tgt[idx];
        }
    const double tinv = 1.0 / std::sqrt(tn);
    for (auto& v : tgt) v *= tinv;

    // projectile-target overlap integral O = int dR |<phi|Phi(.,R)>|^2
    double overlap = 0.0;
    for (int j = 0; j < gr.n; ++j) {
        std::complex<double> g(0.0, 0.0);
        for (int i = 0; i < ge.n; ++i)
            g += ge.weights[i] * std::conj(phi[i]) * tgt[static_cast<size_t>(i) * gr.n + j];
        overlap += gr.weights[j] * std::norm(g);
    }
    out.overlap = overlap;
    if (overlap > 1e-8)
        out.warnings.push_back("projectile-target overlap above 1e-8; normalization handles it "
                               "but the packet may start too close to the target");
    const double edge = std::min(projectile.z0 - ge.xmin, ge.xmax - projectile.z0);
    if (edge < 5.0 * sz)
        out.warnings.push_back("projectile starts closer than 5 widths to the domain edge");

    const double sign = symmetry == ExchangeSymmetry::antisymmetric ? -1.0 : 1.0;
    out.psi.amp.resize(out.psi.grid.total_points());
#pragma omp parallel for schedule(static)
    for (int i1 = 0; i1 < ge.n; ++i1) {
        for (int i2 = 0; i2 < ge.n; ++i2) {
            std::complex<double>* dst = out.psi.amp.data() + out.psi.grid.index(i1, i2, 0);
            const double* t1 = tgt.data() + static_cast<size_t>(i2) * gr.n; // Phi(z2,R)
            const double* t2 = tgt.data() + static_cast<size_t>(i1) * gr.n; // Phi(z1,R)
            const std::complex<double> f1 = phi[i1];
            const std::complex<double> f2 = phi[i2];
            if (symmetry == ExchangeSymmetry::none) {
                for (int ir = 0; ir < gr.n; ++ir) dst[ir] = f1 * t1[ir];
            } else {
                for (int ir = 0; ir < gr.n; ++ir) dst[ir] = f1 * t1[ir] + sign * f2 * t2[ir];
            }
        }
    }
    // R-axis Dirichlet boundaries carry no amplitude
    for (int i1 = 0; i1 < ge.n; ++i1)
        for (int i2 = 0; i2 < ge.n; ++i2) {
            out.psi.at(i1, i2, 0) = 0.0;
            out.psi.at(i1, i2, gr.n - 1) = 0.0;
        }
    const double nn = out.psi.norm2();
    out.psi.scale(1.0 / std::sqrt(nn));
    out.psi.norm_history.push_back({0.0, 1.0});
    return out;
}

// ---------------------------------------------------------------------------
// real-time propagation
// ---------------------------------------------------------------------------

PropagationReport propagate(WaveFunction3D& psi, const ModelParams& params,
                            const PropagateOptions& opt) {
    params.validate();
    const Grid1D& ge = psi.grid.electronic;
    const Grid1D& gr = psi.grid.nuclear;
    if (ge.boundary != Boundary::periodic)
        throw std::invalid_argument("propagate: electronic axes must be periodic");
    if (gr.boundary != Boundary::dirichlet)
        throw std::invalid_argument("propagate: nuclear axis must be Dirichlet");
    const double kmax = ge.k_max();
    if (opt.dt * kmax * kmax / 2.0 > kPi / 2.0 + 1e-12)
        throw std::invalid_argument("propagate: dt too large for the electronic Nyquist phase bound");
    if (opt.output_stride < 1) throw std::invalid_argument("propagate: output_stride must be >= 1");

    fft_init(opt.threads);
    const int n1 = ge.n, nr = gr.n;
    const std::int64_t total = psi.grid.total_points();

    // half-step phase exp(-i (V - iW) dt/2)
    std::vector<std::complex<double>> halfphase(total);
    {
        std::vector<std::complex<double>> we(n1, {0, 0}), wr(nr, {0, 0});
        if (opt.use_caps) {
            we = cap_profile(ge, opt.caps, CapAxis::electronic);
            wr = cap_profile(gr, opt.caps, CapAxis::nuclear);
        }
#pragma omp parallel for schedule(static)
        for (int i1 = 0; i1 < n1; ++i1) {
            for (int i2 = 0; i2 < n1; ++i2) {
                std::complex<double>* dst = halfphase.data() + psi.grid.index(i1, i2, 0);
                const double wsum12 = -(we[i1].imag() + we[i2].imag()); // W >= 0
                for (int ir = 0; ir < nr; ++ir) {
                    const double v = total_potential_3d(ge.points[i1], ge.points[i2],
                                                        std::max(gr.points[ir], 1e-12), params);
                    const double w = wsum12 - wr[ir].imag();
                    dst[ir] = std::polar(std::exp(-0.5 * opt.dt * w), -0.5 * opt.dt * v);
                }
            }
        }
    }

    // kinetic phases, transform normalizations folded in
    std::vector<std::complex<double>> kz(n1), kr(nr - 2);
    {
        auto k = fft_wavenumbers(ge);
        for (int i = 0; i < n1; ++i)
            kz[i] = std::polar(1.0 / n1, -opt.dt * 0.5 * k[i] * k[i]);
        auto km = dst_wavenumbers(gr);
        const double dstn = 1.0 / (2.0 * (nr - 1));
        for (int j = 0; j + 2 < nr; ++j)
            kr[j] = std::polar(dstn, -opt.dt * 0.5 * km[j] * km[j] / params.m_red());
    }

    FftPlan f_fwd = plan_fft_axes01(psi.amp.data(), n1, n1, nr, FFTW_FORWARD);
    FftPlan f_bwd = plan_fft_axes01(psi.amp.data(), n1, n1, nr, FFTW_BACKWARD);
    FftPlan f_dst = plan_dst_last_axis(psi.amp.data(), static_cast<std::int64_t>(n1) * n1, nr);

    const int steps = static_cast<int>(std::llround(opt.t_final / opt.dt));
    const double t0 = psi.time;
    double prev_norm = psi.norm2();
    if (psi.norm_history.empty()) psi.norm_history.push_back({t0, prev_norm});
    if (opt.on_output) opt.on_output(psi, 0);

    std::vector<double> partial(n1, 0.0);
    bool pending_open = true; // next step must apply the opening half phase

    for (int step = 1; step <= steps; ++step) {
        if (pending_open) {
#pragma omp parallel for schedule(static)
            for (int i1 = 0; i1 < n1; ++i1) {
                std::complex<double>* p = psi.amp.data() + static_cast<std::int64_t>(i1) * n1 * nr;
                const std::complex<double>* f = halfphase.data() + static_cast<std::int64_t>(i1) * n1 * nr;
                for (std::int64_t i = 0; i < static_cast<std::int64_t>(n1) * nr; ++i) p[i] *= f[i];
            }
            pending_open = false;
        }

        // electronic kinetic step
        f_fwd.execute();
#pragma omp parallel for schedule(static)
        for (int i1 = 0; i1 < n1; ++i1) {
            const std::complex<double> c1 = kz[i1];
            std::complex<double>* p = psi.amp.data() + static_cast<std::int64_t>(i1) * n1 * nr;
            for (int i2 = 0; i2 < n1; ++i2) {
                const std::complex<double> c12 = c1 * kz[i2]; // carries the full 1/(n1*n2)
                std::complex<double>* q = p + static_cast<std::int64_t>(i2) * nr;
                for (int ir = 0; ir < nr; ++ir) q[ir] *= c12;
            }
        }
        f_bwd.execute();

        // nuclear kinetic step
        f_dst.execute();
#pragma omp parallel for schedule(static)
        for (int i1 = 0; i1 < n1; ++i1) {
            std::complex<double>* p = psi.amp.data() + static_cast<std::int64_t>(i1) * n1 * nr;
            for (int i2 = 0; i2 < n1; ++i2) {
                std::complex<double>* q = p + static_cast<std::int64_t>(i2) * nr;
                for (int j = 0; j + 2 < nr; ++j) q[j + 1] *= kr[j];
                q[0] = 0.0;
                q[nr - 1] = 0.0;
            }
        }
        f_dst.execute();

        // closing half phase; if the next step continues un-observed, fold its
        // opening half phase into the same pass. Norm is always taken on the
        // true (single half phase) state.
        const bool at_output = (step % opt.output_stride == 0) || step == steps;
#pragma omp parallel for schedule(static)
        for (int i1 = 0; i1 < n1; ++i1) {
            double acc = 0.0;
            std::complex<double>* p = psi.amp.data() + static_cast<std::int64_t>(i1) * n1 * nr;
            const std::complex<double>* f = halfphase.data() + static_cast<std::int64_t>(i1) * n1 * nr;
            for (int i2 = 0; i2 < n1; ++i2) {
                double rowacc = 0.0;
                std::complex<double>* q = p + static_cast<std::int64_t>(i2) * nr;
                const std::complex<double>* g = f + static_cast<std::int64_t>(i2) * nr;
                if (at_output) {
                    for (int ir = 0; ir < nr; ++ir) {
                        const std::complex<double> a = q[ir] * g[ir];
                        rowacc += gr.weights[ir] * std::norm(a);
                        q[ir] = a;
                    }
                } else {
                    for (int ir = 0; ir < nr; ++ir) {
                        const std::complex<double> a = q[ir] * g[ir];
                        rowacc += gr.weights[ir] * std::norm(a);
                        q[ir] = a * g[ir];
                    }
                }
                acc += ge.weights[i2] * rowacc;
            }
            partial[i1] = ge.weights[i1] * acc;
        }
        double nn = 0.0;
        for (int i1 = 0; i1 < n1; ++i1) nn += partial[i1];

        psi.time = t0 + step * opt.dt;
        psi.norm_history.push_back({psi.time, nn});
        if (std::isnan(nn)) {
            std::ostringstream os;
            os << "propagate: NaN detected at step " << step;
            throw std::runtime_error(os.str());
        }
        if (nn > prev_norm * (1.0 + 1e-10)) {
            std::ostringstream os;
            os << "propagate: norm increased at step " << step << " (" << prev_norm << " -> " << nn
               << "); check CAP sign or dt";
            throw std::runtime_error(os.str());
        }
        prev_norm = nn;
        if (at_output) {
            pending_open = true;
            if (opt.on_output) opt.on_output(psi, step);
        }
    }

    PropagationReport rep;
    rep.steps = steps;
    rep.final_norm2 = prev_norm;
    return rep;
}

double energy_expectation(const WaveFunction3D& psi, const ModelParams& params, int threads) {
    fft_init(threads);
    const Grid1D& ge = psi.grid.electronic;
    const Grid1D& gr = psi.grid.nuclear;
    const int n1 = ge.n, nr = gr.n;
    std::vector<std::complex<double>> work(psi.amp);

    double kin12 = 0.0;
    {
        FftPlan f = plan_fft_axes01(work.data(), n1, n1, nr, FFTW_FORWARD);
        f.execute();
        auto k = fft_wavenumbers(ge);
        const double cell = ge.spacing * ge.spacing / (static_cast<double>(n1) * n1);
        std::vector<double> partial(n1, 0.0);
#pragma omp parallel for schedule(static)
        for (int i1 = 0; i1 < n1; ++i1) {
            double acc = 0.0;
            const std::complex<double>* p = work.data() + static_cast<std::int64_t>(i1) * n1 * nr;
            for (int i2 = 0; i2 < n1; ++i2) {
                const double t12 = 0.5 * (k[i1] * k[i1] + k[i2] * k[i2]);
                double rowacc = 0.0;
                for (int ir = 0; ir < nr; ++ir)
                    rowacc += gr.weights[ir] * std::norm(p[static_cast<std::int64_t>(i2) * nr + ir]);
                acc += t12 * rowacc;
            }
            partial[i1] = acc * cell;
        }
        for (int i1 = 0; i1 < n1; ++i1) kin12 += partial[i1];
    }

    double kinr = 0.0;
    {
        std::copy(psi.amp.begin(), psi.amp.end(), work.begin());
        FftPlan f = plan_dst_last_axis(work.data(), static_cast<std::int64_t>(n1) * n1, nr);
        f.execute();
        auto km = dst_wavenumbers(gr);
        const double fac = gr.spacing / (2.0 * (nr - 1));
        std::vector<double> partial(n1, 0.0);
#pragma omp parallel for schedule(static)
        for (int i1 = 0; i1 < n1; ++i1) {
            double acc = 0.0;
            const std::complex<double>* p = work.data() + static_cast<std::int64_t>(i1) * n1 * nr;
            for (int i2 = 0; i2 < n1; ++i2) {
                const std::complex<double>* q = p + static_cast<std::int64_t>(i2) * nr;
                double rowacc = 0.0;
                for (int j = 0; j + 2 < nr; ++j)
                    rowacc += 0.5 * km[j] * km[j] / params.m_red() * std::norm(q[j + 1]);
                acc += ge.weights[i2] * rowacc;
            }
            partial[i1] = ge.weights[i1] * acc * fac;
        }
        for (int i1 = 0; i1 < n1; ++i1) kinr += partial[i1];
    }

    double pot = 0.0;
    {
        std::vector<double> partial(n1, 0.0);
#pragma omp parallel for schedule(static)
        for (int i1 = 0; i1 < n1; ++i1) {
            double acc = 0.0;
            const std::complex<double>* p = psi.amp.data() + static_cast<std::int64_t>(i1) * n1 * nr;
            for (int i2 = 0; i2 < n1; ++i2) {
                double rowacc = 0.0;
                for (int ir = 0; ir < nr; ++ir) {
                    const double v = total_potential_3d(ge.points[i1], ge.points[i2],
                                                        std::max(gr.points[ir], 1e-12), params);
                    rowacc += gr.weights[ir] * v * std::norm(p[static_cast<std::int64_t>(i2) * nr + ir]);
                }
                acc += ge.weights[i2] * rowacc;
            }
            partial[i1] = ge.weights[i1] * acc;
        }
        for (int i1 = 0; i1 < n1; ++i1) pot += partial[i1];
    }
    return (kin12 + kinr + pot) / psi.norm2();
}

} // namespace icec
