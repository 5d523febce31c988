#include "icecsim/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace icec {

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Binder {
    std::map<std::string, std::map<std::string, std::function<void(const std::string&)>>> set;
    std::map<std::string, std::map<std::string, std::function<std::string()>>> get;
    std::vector<std::pair<std::string, std::vector<std::string>>> order;

    void bind_double(const std::string& sec, const std::string& key, double* p) {
        set[sec][key] = [p](const std::string& v) { *p = std::stod(v); };
        get[sec][key] = [p]() { return fmt_double(*p); };
        note(sec, key);
    }
    void bind_int(const std::string& sec, const std::string& key, int* p) {
        set[sec][key] = [p](const std::string& v) { *p = std::stoi(v); };
        get[sec][key] = [p]() { return std::to_string(*p); };
        note(sec, key);
    }
    void bind_bool(const std::string& sec, const std::string& key, bool* p) {
        set[sec][key] = [p](const std::string& v) {
            if (v == "true" || v == "1") *p = true;
            else if (v == "false" || v == "0") *p = false;
            else throw std::invalid_argument("config: bad bool value '" + v + "'");
        };
        get[sec][key] = [p]() { return *p ? std::string("true") : std::string("false"); };
        note(sec, key);
    }
    void bind_string(const std::string& sec, const std::string& key, std::string* p) {
        set[sec][key] = [p](const std::string& v) { *p = v; };
        get[sec][key] = [p]() { return *p; };
        note(sec, key);
    }
    void note(const std::string& sec, const std::string& key) {
        for (auto& [s, keys] : order)
            if (s == sec) {
                keys.push_back(key);
                return;
            }
        order.push_back({sec, {key}});
    }
};

Binder make_binder(RunConfig& c) {
    Binder b;
    b.bind_double("model", "l_c", &c.model.l_c);
    b.bind_double("model", "l_alpha", &c.model.l_alpha);
    b.bind_double("model", "q_He", &c.model.q_He);
    b.bind_double("model", "q_Ne", &c.model.q_Ne);
    b.bind_double("model", "beta", &c.model.beta);
    b.bind_double("model", "m_Ne", &c.model.m_Ne);
    b.bind_double("model", "m_He", &c.model.m_He);

    b.bind_double("grid", "ze_min", &c.grid.ze_min);
    b.bind_double("grid", "ze_max", &c.grid.ze_max);
    b.bind_int("grid", "ze_points", &c.grid.ze_points);
    b.bind_double("grid", "r_min", &c.grid.r_min);
    b.bind_double("grid", "r_max", &c.grid.r_max);
    b.bind_int("grid", "r_points", &c.grid.r_points);

    b.bind_double("projectile", "epsilon_in", &c.projectile.epsilon_in);
    b.bind_double("projectile", "delta_epsilon", &c.projectile.delta_epsilon);
    b.bind_double("projectile", "z0", &c.projectile.z0);
    b.bind_int("projectile", "direction", &c.projectile.direction);
    b.bind_string("projectile", "symmetry", &c.projectile.symmetry);

    b.bind_double("propagation", "dt", &c.propagation.dt);
    b.bind_double("propagation", "t_final_fs", &c.propagation.t_final_fs);
    b.bind_int("propagation", "output_stride", &c.propagation.output_stride);
    b.bind_double("propagation", "cap_eta", &c.propagation.cap_eta);
    b.bind_double("propagation", "cap_z", &c.propagation.cap_z);
    b.bind_double("propagation", "cap_r", &c.propagation.cap_r);
    b.bind_bool("propagation", "use_caps", &c.propagation.use_caps);
    b.bind_double("propagation", "relax_dtau", &c.propagation.relax_dtau);
    b.bind_double("propagation", "relax_tau_total", &c.propagation.relax_tau_total);

    b.bind_double("pec", "r_min", &c.pec.r_min);
    b.bind_double("pec", "r_max", &c.pec.r_max);
    b.bind_double("pec", "r_step", &c.pec.r_step);
    b.bind_int("pec", "n_curves", &c.pec.n_curves);
    b.bind_double("pec", "ze_half_width", &c.pec.ze_half_width);
    b.bind_int("pec", "ze_points", &c.pec.ze_points);

    b.bind_int("analysis", "stride", &c.analysis.stride);
    b.bind_double("analysis", "delta_t_fs", &c.analysis.delta_t_fs);
    b.bind_bool("analysis", "normalized_entropies", &c.analysis.normalized_entropies);
    b.bind_int("analysis", "n_pops", &c.analysis.n_pops);

    b.bind_string("io", "run_dir", &c.io.run_dir);
    b.bind_string("io", "retention", &c.io.retention);
    return b;
}

} // namespace

RunConfig RunConfig::parse(const std::string& text) {
    RunConfig cfg;
    Binder b = make_binder(cfg);
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw std::invalid_argument("config: bad section header at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            if (!b.set.count(section))
                throw std::invalid_argument("config: unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value at line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (section.empty()) throw std::invalid_argument("config: key outside any section at line " + std::to_string(lineno));
        auto& keys = b.set.at(section);
        auto it = keys.find(key);
        if (it == keys.end())
            throw std::invalid_argument("config: unknown key '" + key + "' in section [" + section + "]");
        it->second(val);
    }
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

std::string RunConfig::serialize() const {
    RunConfig copy = *this;
    Binder b = make_binder(copy);
    std::ostringstream os;
    for (const auto& [sec, keys] : b.order) {
        os << "[" << sec << "]\n";
        for (const auto& k : keys) os << k << " = " << b.get.at(sec).at(k)() << "\n";
        os << "\n";
    }
    return os.str();
}

void RunConfig::write_file(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("config: cannot write " + path);
    f << serialize();
}

std::uint64_t RunConfig::hash() const { return fnv1a64(serialize()); }

std::uint64_t RunConfig::section_hash(const std::string& section) const {
    RunConfig copy = *this;
    Binder b = make_binder(copy);
    std::ostringstream os;
    for (const auto& [sec, keys] : b.order) {
        if (sec != section) continue;
        for (const auto& k : keys) os << k << " = " << b.get.at(sec).at(k)() << "\n";
    }
    return fnv1a64(os.str());
}

void RunConfig::validate() const {
    model.validate();
    if (grid.ze_points < 8 || grid.r_points < 8) throw std::invalid_argument("config: grids need >= 8 points");
    if (!(grid.ze_max > grid.ze_min) || !(grid.r_max > grid.r_min))
        throw std::invalid_argument("config: empty grid domain");
    if (grid.r_min < 0.0) throw std::invalid_argument("config: nuclear domain must be nonnegative");
    if (!(propagation.dt > 0.0) || !(propagation.t_final_fs > 0.0))
        throw std::invalid_argument("config: propagation times must be positive");
    if (propagation.output_stride < 1 || analysis.stride < 1)
        throw std::invalid_argument("config: strides must be >= 1");
    if (io.retention != "all" && io.retention != "analyzed" && io.retention != "none")
        throw std::invalid_argument("config: retention must be all|analyzed|none");
    exchange_symmetry_from_string(projectile.symmetry); // throws on bad value
    if (!(pec.r_step > 0.0) || !(pec.r_max > pec.r_min) || pec.n_curves < 3)
        throw std::invalid_argument("config: bad pec section");
}

} // namespace icec
