#include "icecsim/pipeline.hpp"

#include "icecsim/spline.hpp"
#include "icecsim/units.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace icec {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kStageOrder = {"calibrate", "pec", "relax", "run", "analyze"};

json load_manifest(const fs::path& dir) {
    std::ifstream f(dir / "manifest.json");
    if (!f) return json::object();
    json j;
    f >> j;
    return j;
}

void store_manifest(const fs::path& dir, const json& j) {
    std::ofstream f(dir / "manifest.json");
    f << j.dump(2) << "\n";
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

Pipeline::Pipeline(RunConfig cfg, fs::path run_dir, int threads, bool strict)
    : cfg_(std::move(cfg)), dir_(std::move(run_dir)), threads_(threads), strict_(strict) {
    cfg_.validate();
    fs::create_directories(dir_);
    fs::create_directories(dir_ / "snapshots");
}

std::uint64_t Pipeline::stage_hash(const std::string& stage) const {
    // each stage hashes its own config sections plus the upstream stage hash
    std::string acc;
    auto add = [&](const std::string& s) { acc += std::to_string(cfg_.section_hash(s)) + ";"; };
    std::uint64_t upstream = 0;
    if (stage == "calibrate") {
        add("model");
    } else if (stage == "pec") {
        upstream = stage_hash("calibrate");
        add("model");
        add("pec");
    } else if (stage == "relax") {
        upstream = stage_hash("pec");
        add("model");
        add("grid");
        acc += fmt(cfg_.propagation.relax_dtau) + ";" + fmt(cfg_.propagation.relax_tau_total) + ";";
    } else if (stage == "run") {
        upstream = stage_hash("relax");
        add("projectile");
        add("propagation");
        add("analysis");
    } else if (stage == "analyze") {
        upstream = stage_hash("run");
        add("analysis");
    }
    acc += std::to_string(upstream);
    return fnv1a64(acc);
}

bool Pipeline::stage_fresh(const std::string& stage, const std::vector<std::string>& files) const {
    json m = load_manifest(dir_);
    if (!m.contains("stages") || !m["stages"].contains(stage)) return false;
    const auto& s = m["stages"][stage];
    if (!s.value("done", false)) return false;
    if (s.value("hash", std::string()) != std::to_string(stage_hash(stage))) return false;
    for (const auto& f : files)
        if (!fs::exists(dir_ / f)) return false;
    return true;
}

void Pipeline::stage_done(const std::string& stage, const std::vector<std::string>& files, double wall_s) {
    json m = load_manifest(dir_);
    m["config_hash"] = std::to_string(cfg_.hash());
    m["stages"][stage] = {{"done", true},
                          {"hash", std::to_string(stage_hash(stage))},
                          {"files", files},
                          {"wall_s", wall_s}};
    // invalidate everything downstream of this stage
    bool after = false;
    for (const auto& st : kStageOrder) {
        if (after && m["stages"].contains(st)) m["stages"][st]["done"] = false;
        if (st == stage) after = true;
    }
    store_manifest(dir_, m);
}

Grid1D Pipeline::prop_grid_e() const {
    return Grid1D::periodic(cfg_.grid.ze_min, cfg_.grid.ze_max, cfg_.grid.ze_points);
}
Grid1D Pipeline::prop_grid_r() const {
    return Grid1D::dirichlet(cfg_.grid.r_min, cfg_.grid.r_max, cfg_.grid.r_points);
}

Pipeline::CalibrateOutcome Pipeline::calibrate() {
    const auto t0 = std::chrono::steady_clock::now();
    CalibrateOutcome out{};

    // He: align to the He first ionization energy; Ne: align to the Ne one.
    const double target_he = -0.904;
    const double target_ne = -0.7925;
    CalibrationResult he = calibrate_charge(target_he, cfg_.model.l_alpha, cfg_.model.l_c, 1.0);
    CalibrationResult ne = calibrate_charge(target_ne, cfg_.model.l_alpha, cfg_.model.l_c, 1.0);
    out.q_He = he.q;
    out.q_Ne = ne.q;
    out.eps_dis_He = he.achieved_energy;
    out.eps_dis_Ne = ne.achieved_energy;

    cfg_.model.q_He = he.q;
    cfg_.model.q_Ne = ne.q;

    std::ofstream csv(dir_ / "calibration.csv");
    csv << "species,target_energy,q,achieved_energy,bracket_lo,bracket_hi,iterations\n";
    csv << "He," << fmt(target_he) << ',' << fmt(he.q) << ',' << fmt(he.achieved_energy) << ','
        << fmt(he.bracket_lo) << ',' << fmt(he.bracket_hi) << ',' << he.iterations << "\n";
    csv << "Ne," << fmt(target_ne) << ',' << fmt(ne.q) << ',' << fmt(ne.achieved_energy) << ','
        << fmt(ne.bracket_lo) << ',' << fmt(ne.bracket_hi) << ',' << ne.iterations << "\n";
    csv.close();
    cfg_.write_file((dir_ / "config_calibrated.ini").string());

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    stage_done("calibrate", {"calibration.csv", "config_calibrated.ini"}, wall);
    return out;
}

Pipeline::PecOutcome Pipeline::pec() {
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<double> rgrid;
    for (double r = cfg_.pec.r_min; r <= cfg_.pec.r_max + 1e-9; r += cfg_.pec.r_step)
        rgrid.push_back(r);
    const Grid1D egrid = Grid1D::dirichlet(-cfg_.pec.ze_half_width, cfg_.pec.ze_half_width,
                                           cfg_.pec.ze_points);
    PecScanOptions opt;
    opt.store_states = false;
    opt.threads = threads_;
    PecTable table = scan_pec(cfg_.model, rgrid, cfg_.pec.n_curves, egrid, opt);
    write_pec_csv(table, (dir_ / "pec.csv").string());

    PecOutcome out;
    out.derived = derive_thresholds(table);

    EigenSolution vib = vibrational_states(table.R_grid, table.curves[0], cfg_.model.m_red(),
                                           4);
    out.n_bound_vibrational = static_cast<int>(vib.energies.size());
    if (!vib.energies.empty()) out.vib_e0 = vib.energies[0];
    if (vib.energies.size() > 1) out.vib_gap = vib.energies[1] - vib.energies[0];

    json thr{{"R_eq", out.derived.R_eq},
             {"eps0_at_Req", out.derived.eps0_at_Req},
             {"delta_eps_01", out.derived.delta_eps_01},
             {"delta_eps_02", out.derived.delta_eps_02},
             {"curvature", out.derived.curvature},
             {"dissociation_limits", out.derived.dissociation_limits},
             {"vibrational_ground", out.vib_e0},
             {"vibrational_gap", out.vib_gap},
             {"n_bound_vibrational", out.n_bound_vibrational}};
    std::ofstream tf(dir_ / "thresholds.json");
    tf << thr.dump(2) << "\n";
    tf.close();

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    stage_done("pec", {"pec.csv", "thresholds.json"}, wall);
    return out;
}

std::vector<double> Pipeline::relax_seed(const Grid1D& ge, const Grid1D& gr) {
    // electronic part: ground state at R_eq on a Dirichlet grid sharing the
    // periodic grid's points (one extra endpoint, dropped afterwards)
    json thr;
    {
        std::ifstream tf(dir_ / "thresholds.json");
        if (!tf) throw std::runtime_error("relax: run the pec stage first");
        tf >> thr;
    }
    const double r_eq = thr.at("R_eq");

    const Grid1D ge_d = Grid1D::dirichlet(ge.xmin, ge.xmin + ge.spacing * ge.n, ge.n + 1);
    auto vel = [&](double z) { return ion_potential(z, r_eq, cfg_.model); };
    EigenSolution xi = solve_tise_1d(ge_d, vel, 1.0, 1);

    // nuclear part: ground vibrational state of eps_0(R), splined onto gr
    std::vector<double> rg, e0;
    {
        std::ifstream pf(dir_ / "pec.csv");
        if (!pf) throw std::runtime_error("relax: missing pec.csv");
        std::string line;
        std::getline(pf, line);
        while (std::getline(pf, line)) {
            if (line.empty()) continue;
            std::istringstream ss(line);
            std::string cell;
            std::getline(ss, cell, ',');
            rg.push_back(std::stod(cell));
            std::getline(ss, cell, ',');
            e0.push_back(std::stod(cell));
        }
    }
    EigenSolution vib = vibrational_states(rg, e0, cfg_.model.m_red(), 1);
    if (vib.energies.empty()) throw std::runtime_error("relax: no bound vibrational state");
    const Grid1D& vg = vib.grid;
    std::vector<double> vx(vg.points.begin(), vg.points.end());
    std::vector<double> vy(vg.n);
    for (int i = 0; i < vg.n; ++i) vy[i] = vib.states(i, 0);
    CubicSpline chi(vx, vy);

    std::vector<double> seed(static_cast<size_t>(ge.n) * gr.n, 0.0);
    for (int i = 0; i < ge.n; ++i) {
        const double xz = xi.states(i, 0); // shared point layout
        for (int j = 1; j + 1 < gr.n; ++j) {
            const double r = gr.points[j];
            const double cv = (r >= vx.front() && r <= vx.back()) ? chi(r) : 0.0;
            seed[static_cast<size_t>(i) * gr.n + j] = xz * cv;
        }
    }
    return seed;
}

RelaxResult Pipeline::load_or_relax() {
    const Grid1D ge = prop_grid_e();
    const Grid1D gr = prop_grid_r();
    const fs::path tpath = dir_ / "target.bin";

    if (stage_fresh("relax", {"target.bin", "target.bin.json"})) {
        WaveFunction3D dummy; // target stored via the snapshot container with n2 = 1 lines
        std::ifstream mf(tpath.string() + ".json");
        json j;
        mf >> j;
        RelaxResult res;
        res.grid_e = ge;
        res.grid_R = gr;
        res.energy = j.at("energy");
        res.tau_used = j.at("tau_used");
        res.state.resize(static_cast<size_t>(ge.n) * gr.n);
        std::FILE* f = std::fopen(tpath.c_str(), "rb");
        if (f && std::fread(res.state.data(), sizeof(std::complex<double>), res.state.size(), f)
                     == res.state.size()) {
            std::fclose(f);
            return res;
        }
        if (f) std::fclose(f);
    }

    RelaxOptions ropt;
    ropt.dtau = cfg_.propagation.relax_dtau;
    ropt.tau_total = cfg_.propagation.relax_tau_total;
    ropt.threads = threads_;
    RelaxResult res = relax_target(cfg_.model, ge, gr, relax_seed(ge, gr), ropt);

    std::FILE* f = std::fopen(tpath.c_str(), "wb");
    if (!f) throw std::runtime_error("relax: cannot write target.bin");
    std::fwrite(res.state.data(), sizeof(std::complex<double>), res.state.size(), f);
    std::fclose(f);
    json j{{"energy", res.energy}, {"tau_used", res.tau_used}, {"n_e", ge.n}, {"n_R", gr.n}};
    std::ofstream mf(tpath.string() + ".json");
    mf << j.dump(2) << "\n";
    return res;
}

Pipeline::RelaxOutcome Pipeline::relax() {
    const auto t0 = std::chrono::steady_clock::now();
    if (!stage_fresh("pec", {"pec.csv", "thresholds.json"})) pec();
    RelaxResult res = load_or_relax();
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    stage_done("relax", {"target.bin", "target.bin.json"}, wall);
    return RelaxOutcome{res.energy, res.tau_used};
}

Pipeline::RunOutcome Pipeline::run() {
    const auto t0 = std::chrono::steady_clock::now();
    if (!stage_fresh("relax", {"target.bin", "target.bin.json"})) relax();
    RelaxResult target = load_or_relax();

    ProjectileSpec proj;
    proj.epsilon_in = cfg_.projectile.epsilon_in;
    proj.delta_epsilon = cfg_.projectile.delta_epsilon;
    proj.z0 = cfg_.projectile.z0;
    proj.direction = cfg_.projectile.direction;

    InitialStateResult init = build_initial_state(target, proj, cfg_.exchange_symmetry());
    for (const auto& w : init.warnings) std::cerr << "[warn] " << w << "\n";

    RunOutcome out;
    InfoTrace& trace = out.trace;
    trace.n_pops = cfg_.analysis.n_pops;

    const std::string params_hash = std::to_string(cfg_.hash());
    const std::string retention = cfg_.io.retention;
    const int astride = cfg_.analysis.stride;
    int output_count = 0;
    std::vector<std::string> snapshot_files;

    auto on_output = [&](const WaveFunction3D& psi, int step) {
        const bool analyzed = (output_count % astride) == 0;
        if (analyzed) {
            std::vector<double> pops;
            InfoRow row = analyze_snapshot(psi, cfg_.analysis.normalized_entropies, &pops);
            trace.append(row, pops);
            // invariant checks: trace consistency and exchange symmetry
            SpectralData sp = reduced_spectra(psi);
            const double nn = psi.norm2();
            if (std::abs(sp.trace_e - nn) > 1e-8 || std::abs(sp.trace_N - nn) > 1e-8)
                out.invariant_failures.push_back("trace consistency violated at t = " + fmt(row.t_fs));
            if (psi.symmetry != ExchangeSymmetry::none && psi.symmetry_residual() > 1e-8)
                out.invariant_failures.push_back("exchange symmetry violated at t = " + fmt(row.t_fs));
        }
        const bool keep = retention == "all" || (retention == "analyzed" && analyzed);
        if (keep) {
            char name[64];
            std::snprintf(name, sizeof name, "snapshots/snap_%06d.bin", step);
            psi.save((dir_ / name).string(), params_hash);
            snapshot_files.push_back(name);
        }
        ++output_count;
    };

    PropagateOptions popt;
    popt.dt = cfg_.propagation.dt;
    popt.t_final = fs_to_au(cfg_.propagation.t_final_fs);
    popt.output_stride = cfg_.propagation.output_stride;
    popt.caps.eta = cfg_.propagation.cap_eta;
    popt.caps.z_cap = cfg_.propagation.cap_z;
    popt.caps.r_cap = cfg_.propagation.cap_r;
    popt.use_caps = cfg_.propagation.use_caps;
    popt.threads = threads_;
    popt.on_output = on_output;

    PropagationReport rep = propagate(init.psi, cfg_.model, popt);
    out.final_norm = rep.final_norm2;

    // norm every step
    {
        std::ofstream nf(dir_ / "norm.csv");
        nf << "time_fs,norm\n";
        for (const auto& [t, n] : init.psi.norm_history)
            nf << fmt(au_to_fs(t)) << ',' << fmt(n) << "\n";
    }
    trace.write_csv((dir_ / "trace.csv").string());
    trace.write_nop_csv((dir_ / "nops.csv").string());
    {
        json idx{{"snapshots", snapshot_files}, {"params_hash", params_hash}};
        std::ofstream f(dir_ / "snapshots" / "index.json");
        f << idx.dump(2) << "\n";
    }

    // with CAPs the norm must never grow
    for (size_t i = 1; i < init.psi.norm_history.size(); ++i)
        if (init.psi.norm_history[i].second
            > init.psi.norm_history[i - 1].second * (1.0 + 1e-10)) {
            out.invariant_failures.push_back("norm increased during propagation");
            break;
        }
    out.invariants_ok = out.invariant_failures.empty();

    json m = load_manifest(dir_);
    m["invariants_ok"] = out.invariants_ok;
    m["invariant_failures"] = out.invariant_failures;
    store_manifest(dir_, m);

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    stage_done("run", {"trace.csv", "nops.csv", "norm.csv"}, wall);
    return out;
}

InfoTrace Pipeline::analyze(const fs::path& trajectory_dir, int stride_override) {
    std::ifstream f(trajectory_dir / "index.json");
    if (!f) throw std::runtime_error("analyze: missing snapshot index in " + trajectory_dir.string());
    json idx;
    f >> idx;
    std::vector<std::string> files = idx.at("snapshots");
    if (files.empty()) throw std::runtime_error("analyze: no snapshots listed");

    InfoTrace trace;
    trace.n_pops = cfg_.analysis.n_pops;
    const int stride = stride_override > 0 ? stride_override : 1;
    for (size_t i = 0; i < files.size(); i += stride) {
        const fs::path p = trajectory_dir.parent_path() / files[i];
        if (!fs::exists(p)) {
            const std::string msg = "analyze: missing snapshot " + p.string();
            if (strict_) throw std::runtime_error(msg);
            std::cerr << "[warn] " << msg << " (skipped)\n";
            continue;
        }
        WaveFunction3D psi = WaveFunction3D::load(p.string());
        std::vector<double> pops;
        InfoRow row = analyze_snapshot(psi, cfg_.analysis.normalized_entropies, &pops);
        trace.append(row, pops);
    }
    trace.write_csv((dir_ / "trace_recomputed.csv").string());
    trace.write_nop_csv((dir_ / "nops_recomputed.csv").string());
    return trace;
}

std::vector<Pipeline::SweepRow> Pipeline::sweep(const std::vector<double>& energies) {
    std::vector<SweepRow> rows;
    for (double eps : energies) {
        RunConfig sub = cfg_;
        sub.projectile.epsilon_in = eps;
        char name[32];
        std::snprintf(name, sizeof name, "run_eps_%.3f", eps);
        Pipeline pl(sub, dir_ / name, threads_, strict_);
        RunOutcome ro = pl.run();

        SweepRow row{};
        row.epsilon_in = eps;
        const auto& tr = ro.trace;
        if (tr.rows.size() >= 5) {
            // locate the S_e peak over the interior, then score all three
            // estimators inside [t_S - dt, t_S + dt]
            int ipk = 1;
            for (size_t i = 1; i + 1 < tr.rows.size(); ++i)
                if (tr.rows[i].S_e_vN > tr.rows[ipk].S_e_vN) ipk = static_cast<int>(i);
            const double t_pk = tr.rows[ipk].t_fs;
            const double dt_w = cfg_.analysis.delta_t_fs;
            const double t_lo = std::max(tr.rows.front().t_fs, t_pk - dt_w);
            const double t_hi = std::min(tr.rows.back().t_fs, t_pk + dt_w);
            try {
                CollisionTimes ct = estimate_collision_times(tr, t_lo, t_hi);
                row.t_col_S = ct.t_S;
                row.t_col_disp = ct.t_disp;
                row.t_col_I = ct.t_I;
                Retention ret = entanglement_retention(tr, ct.t_S, dt_w);
                row.delta_s_before = ret.before;
                row.delta_s_after = ret.after;
            } catch (const std::exception& e) {
                std::cerr << "[warn] sweep at eps = " << eps << ": " << e.what() << "\n";
            }
        }
        rows.push_back(row);
    }
    std::ofstream f(dir_ / "sweep_summary.csv");
    f << "epsilon_in,t_col_S,t_col_disp,t_col_I,delta_s_before,delta_s_after\n";
    for (const auto& r : rows)
        f << fmt(r.epsilon_in) << ',' << fmt(r.t_col_S) << ',' << fmt(r.t_col_disp) << ','
          << fmt(r.t_col_I) << ',' << fmt(r.delta_s_before) << ',' << fmt(r.delta_s_after) << "\n";
    return rows;
}

} // namespace icec
