#pragma once

#include "icecsim/analysis.hpp"
#include "icecsim/config.hpp"
#include "icecsim/pec.hpp"
#include "icecsim/propagate.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace icec {

// Stage orchestration over one run directory. Each stage records a hash of
// the configuration it depends on (including upstream stage hashes) in
// manifest.json; a stage whose hash matches and whose files exist is
// skipped, and any upstream change invalidates everything downstream.
class Pipeline {
public:
    Pipeline(RunConfig cfg, std::filesystem::path run_dir, int threads = 2, bool strict = false);

    struct CalibrateOutcome {
        double q_He, q_Ne;
        double eps_dis_He, eps_dis_Ne;
    };
    CalibrateOutcome calibrate();

    struct PecOutcome {
        PecDerived derived;
        double vib_e0 = 0.0, vib_gap = 0.0;
        int n_bound_vibrational = 0;
    };
    PecOutcome pec();

    struct RelaxOutcome {
        double energy;
        double tau_used;
    };
    RelaxOutcome relax();

    struct RunOutcome {
        InfoTrace trace;
        double final_norm = 0.0;
        bool invariants_ok = true;
        std::vector<std::string> invariant_failures;
    };
    RunOutcome run();

    InfoTrace analyze(const std::filesystem::path& trajectory_dir, int stride_override = 0);

    struct SweepRow {
        double epsilon_in;
        double t_col_S, t_col_disp, t_col_I;
        double delta_s_before, delta_s_after;
    };
    std::vector<SweepRow> sweep(const std::vector<double>& energies);

    const std::filesystem::path& dir() const { return dir_; }
    const RunConfig& config() const { return cfg_; }

private:
    RunConfig cfg_;
    std::filesystem::path dir_;
    int threads_;
    bool strict_;

    std::uint64_t stage_hash(const std::string& stage) const;
    bool stage_fresh(const std::string& stage, const std::vector<std::string>& files) const;
    void stage_done(const std::string& stage, const std::vector<std::string>& files, double wall_s);
    void invalidate_downstream(const std::string& stage);

    Grid1D prop_grid_e() const;
    Grid1D prop_grid_r() const;
    RelaxResult load_or_relax();
    std::vector<double> relax_seed(const Grid1D& ge, const Grid1D& gr);
};

} // namespace icec
