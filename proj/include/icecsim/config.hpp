#pragma once

#include "icecsim/model.hpp"
#include "icecsim/wavefunction.hpp"

#include <cstdint>
#include <string>

namespace icec {

// Flat INI-style run configuration: [section] blocks of key = value lines,
// '#' comments. Every key has a default; unknown sections or keys are
// rejected; parse(serialize(x)) == x.
struct RunConfig {
    ModelParams model;

    struct GridSection {
        double ze_min = -102.4, ze_max = 102.4;
        int ze_points = 512;
        double r_min = 0.0, r_max = 20.0;
        int r_points = 64;
    } grid;

    struct ProjectileSection {
        double epsilon_in = 0.8;
        double delta_epsilon = 0.06;
        double z0 = -50.0;
        int direction = 1;
        std::string symmetry = "symmetric";
    } projectile;

    struct PropagationSection {
        double dt = 0.05;          // a.u.
        double t_final_fs = 10.0;
        int output_stride = 8;     // steps per output
        double cap_eta = 1e-3;
        double cap_z = 75.0;
        double cap_r = 16.0;
        bool use_caps = true;
        double relax_dtau = 0.413;      // a.u.
        double relax_tau_total = 660.0; // a.u.
    } propagation;

    struct PecSection {
        double r_min = 0.5, r_max = 20.0, r_step = 0.05;
        int n_curves = 6;
        double ze_half_width = 100.0;
        int ze_points = 4001;
    } pec;

    struct AnalysisSection {
        int stride = 10;          // outputs per analyzed snapshot
        double delta_t_fs = 2.0;  // collision half-window
        bool normalized_entropies = false;
        int n_pops = 8;
    } analysis;

    struct IoSection {
        std::string run_dir = "runs/default";
        std::string retention = "analyzed"; // all | analyzed | none
    } io;

    static RunConfig parse(const std::string& text);
    static RunConfig parse_file(const std::string& path);
    std::string serialize() const;
    void write_file(const std::string& path) const;
    std::uint64_t hash() const;          // FNV-1a over the canonical serialization
    std::uint64_t section_hash(const std::string& section) const;
    void validate() const;

    ExchangeSymmetry exchange_symmetry() const { return exchange_symmetry_from_string(projectile.symmetry); }
};

std::uint64_t fnv1a64(const std::string& data);

} // namespace icec
