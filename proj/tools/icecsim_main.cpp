#include "icecsim/pipeline.hpp"
#include "icecsim/units.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

int thread_count(int cli_threads) {
    if (cli_threads > 0) return cli_threads;
    if (const char* env = std::getenv("ICECSIM_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 2;
}

std::vector<double> parse_energies(const std::string& spec) {
    std::vector<double> out;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quasi-1D electron-molecule scattering simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir, energies_spec;
    int threads = 0;
    bool strict = false;
    app.add_option("--config", config_path, "run configuration file")->required();
    app.add_option("--out", out_dir, "override the run directory from [io]");
    app.add_option("--threads", threads, "worker threads (env ICECSIM_THREADS also honored)");
    app.add_flag("--strict", strict, "fail hard on recoverable issues");

    auto* c_cal = app.add_subcommand("calibrate", "fit effective charges to the ionization energies");
    auto* c_pec = app.add_subcommand("pec", "scan Born-Oppenheimer curves and derive thresholds");
    auto* c_rel = app.add_subcommand("relax", "imaginary-time relaxation of the target ion");
    auto* c_run = app.add_subcommand("run", "full relax + propagate + analyze pipeline");
    auto* c_ana = app.add_subcommand("analyze", "recompute the information trace from stored snapshots");
    std::string traj_dir;
    int stride_override = 0;
    c_ana->add_option("--trajectory", traj_dir, "snapshot directory (default: <run_dir>/snapshots)");
    c_ana->add_option("--stride", stride_override, "analyze every k-th stored snapshot");
    auto* c_swp = app.add_subcommand("sweep", "run a set of incoming energies and summarize");
    c_swp->add_option("--energies", energies_spec, "comma list of epsilon_in values")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        icec::RunConfig cfg = icec::RunConfig::parse_file(config_path);
        const std::string dir = out_dir.empty() ? cfg.io.run_dir : out_dir;
        icec::Pipeline pl(cfg, dir, thread_count(threads), strict);

        if (c_cal->parsed()) {
            auto r = pl.calibrate();
            std::cout << "q_He = " << r.q_He << " (eps_dis_He = " << r.eps_dis_He << ")\n"
                      << "q_Ne = " << r.q_Ne << " (eps_dis_Ne = " << r.eps_dis_Ne << ")\n";
        } else if (c_pec->parsed()) {
            auto r = pl.pec();
            std::cout << "R_eq = " << r.derived.R_eq << "\n"
                      << "delta_eps_01 = " << r.derived.delta_eps_01 << "\n"
                      << "delta_eps_02 = " << r.derived.delta_eps_02 << "\n"
                      << "dissociation eps_0 = " << r.derived.dissociation_limits.at(0) << "\n"
                      << "bound vibrational states = " << r.n_bound_vibrational << "\n";
        } else if (c_rel->parsed()) {
            auto r = pl.relax();
            std::cout << "relaxed target energy = " << r.energy << " (tau = " << r.tau_used << " a.u.)\n";
        } else if (c_run->parsed()) {
            auto r = pl.run();
            std::cout << "final norm = " << r.final_norm << ", analyzed rows = " << r.trace.rows.size()
                      << ", invariants " << (r.invariants_ok ? "ok" : "VIOLATED") << "\n";
            if (!r.invariants_ok) {
                for (const auto& s : r.invariant_failures) std::cerr << "  " << s << "\n";
                return 2;
            }
        } else if (c_ana->parsed()) {
            const std::string tdir = traj_dir.empty() ? (pl.dir() / "snapshots").string() : traj_dir;
            auto tr = pl.analyze(tdir, stride_override);
            std::cout << "recomputed " << tr.rows.size() << " rows\n";
        } else if (c_swp->parsed()) {
            auto rows = pl.sweep(parse_energies(energies_spec));
            std::cout << "sweep complete over " << rows.size() << " energies\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
