#ifndef PSFLOW_CONFIG_HPP
#define PSFLOW_CONFIG_HPP

#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "psflow/direct_flow.hpp"
#include "psflow/initial_data.hpp"
#include "psflow/io.hpp"
#include "psflow/prototype_solver.hpp"
#include "psflow/time_map.hpp"

namespace psflow {

/// How the upper bound M for the measure diagnostics is chosen.
enum class MPolicy { boundedness, empirical, fixed };

/// Fully resolved run configuration.  Flat "key = value" sections; every
/// field echoes into the run manifest together with a hash of the source
/// text, so runs are reproducible from the manifest alone.
struct RunConfig {
    // [params]
    int n = 3;
    double p = 2.0;

    // [grid]
    GridMode mode = GridMode::cartesian_1d;
    double extent = 1.0, extent_y = 1.0;
    int points = 201, points_y = 3;

    // [initial]
    std::string preset = "bump";   // bump | plateau | truncated_talenti
    std::string initial_file;      // overrides preset when nonempty
    double amplitude = 1.0;
    double ramp = 0.1;
    double lam = 1.0;

    // [prototype]
    PrototypeRunConfig proto;
    double newton_tol = 1e-9;
    double extinction_eps = 1e-8;

    // [direct]
    double dt = 1e-3;
    double direct_t_end = 1.0;
    LambdaCoupling coupling = LambdaCoupling::projection;
    int sample_every = 1;

    // [rescale]
    double rescale_t_end = 0.0;    // 0: auto, maps to s = 0.99 S*
    int map_samples = 2000;
    double ode_tol = 1e-9;
    double route_tol = 1e-6;

    // [diagnostics]
    int rho_cells = 2;
    std::vector<double> levels{0.25, 0.5};
    MPolicy m_policy = MPolicy::empirical;
    double m_fixed = 0.0;
    int diag_stride = 10;

    // [talenti]
    double talenti_lam = 1.0;
    double talenti_mu = -1.0;

    // [output]
    std::string out_dir = "out";
    int snapshot_stride = 0;       // 0: no field files, k: every k-th snapshot

    std::string source_text;       // original config text (for the manifest hash)

    FlowParams params() const {
        FlowParams fp = make_params(n, p);
        fp.newton_tol = newton_tol;
        fp.extinction_eps = extinction_eps;
        return fp;
    }

    GridPtr make_grid() const {
        switch (mode) {
            case GridMode::cartesian_1d:
                return std::make_shared<Grid>(Grid::cartesian_1d(extent, points));
            case GridMode::cartesian_2d:
                return std::make_shared<Grid>(Grid::cartesian_2d(extent, extent_y, points, points_y));
            case GridMode::radial:
                return std::make_shared<Grid>(Grid::radial(extent, points, n));
        }
        throw config_error("unknown grid mode");
    }

    Field initial_data(const FlowParams& fp) const {
        if (!initial_file.empty())
            return read_snapshot(initial_file, mode == GridMode::radial ? n : 0);
        return make_preset(preset, make_grid(), fp, amplitude, ramp, lam);
    }
};

namespace detail {

struct ConfigEntry {
    std::string value;
    int line;
};

} // namespace detail

/// Parses the flat sectioned key = value format.  '#' starts a comment.
/// Unknown keys and malformed lines are rejected with line numbers.
inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    cfg.source_text = text;

    std::map<std::string, detail::ConfigEntry> kv;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw config_error("config line " + std::to_string(lineno) + ": unterminated section");
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw config_error("config line " + std::to_string(lineno) + ": empty key or value");
        kv[section + "." + key] = {value, lineno};
    }

    auto bad = [&](const std::string& k, const std::string& why) -> config_error {
        const auto it = kv.find(k);
        std::ostringstream os;
        os << "config";
        if (it != kv.end()) os << " line " << it->second.line;
        os << ": field '" << k << "' " << why;
        return config_error(os.str());
    };
    auto take = [&](const std::string& k) {
        const auto it = kv.find(k);
        std::string v;
        if (it != kv.end()) {
            v = it->second.value;
            kv.erase(it);
        }
        return v;
    };
    auto get_d = [&](const std::string& k, double& dst) {
        const std::string v = take(k);
        if (v.empty()) return;
        std::size_t used = 0;
        try {
            dst = std::stod(v, &used);
        } catch (...) {
            throw bad(k, "is not a number: '" + v + "'");
        }
        if (used != v.size()) throw bad(k, "has trailing characters: '" + v + "'");
    };
    auto get_i = [&](const std::string& k, int& dst) {
        double d = dst;
        get_d(k, d);
        dst = static_cast<int>(d);
        if (dst != d) throw bad(k, "must be an integer");
    };
    auto get_l = [&](const std::string& k, long& dst) {
        double d = static_cast<double>(dst);
        get_d(k, d);
        dst = static_cast<long>(d);
    };
    auto get_b = [&](const std::string& k, bool& dst) {
        const std::string v = take(k);
        if (v.empty()) return;
        if (v == "true" || v == "1") dst = true;
        else if (v == "false" || v == "0") dst = false;
        else throw bad(k, "must be true/false");
    };
    auto get_s = [&](const std::string& k, std::string& dst) {
        const std::string v = take(k);
        if (!v.empty()) dst = v;
    };

    get_i("params.n", cfg.n);
    get_d("params.p", cfg.p);

    std::string mode = "cartesian_1d";
    get_s("grid.mode", mode);
    if (mode == "cartesian_1d") cfg.mode = GridMode::cartesian_1d;
    else if (mode == "cartesian_2d") cfg.mode = GridMode::cartesian_2d;
    else if (mode == "radial") cfg.mode = GridMode::radial;
    else throw bad("grid.mode", "must be cartesian_1d | cartesian_2d | radial");
    get_d("grid.extent", cfg.extent);
    get_d("grid.extent_y", cfg.extent_y);
    get_i("grid.points", cfg.points);
    get_i("grid.points_y", cfg.points_y);

    get_s("initial.preset", cfg.preset);
    get_s("initial.file", cfg.initial_file);
    get_d("initial.amplitude", cfg.amplitude);
    get_d("initial.ramp", cfg.ramp);
    get_d("initial.lam", cfg.lam);

    get_d("prototype.ds_init", cfg.proto.ds_init);
    get_d("prototype.ds_min", cfg.proto.ds_min);
    get_d("prototype.ds_max", cfg.proto.ds_max);
    get_b("prototype.adaptive", cfg.proto.adaptive);
    get_d("prototype.gamma_step_factor", cfg.proto.gamma_step_factor);
    get_d("prototype.energy_budget", cfg.proto.energy_budget);
    get_d("prototype.snapshot_cadence", cfg.proto.snapshot_cadence_s);
    get_l("prototype.max_steps", cfg.proto.max_steps);
    get_d("prototype.newton_tol", cfg.newton_tol);
    get_d("prototype.extinction_eps", cfg.extinction_eps);

    get_d("direct.dt", cfg.dt);
    get_d("direct.t_end", cfg.direct_t_end);
    std::string coupling = "projection";
    get_s("direct.source_mode", coupling);
    if (coupling == "projection") cfg.coupling = LambdaCoupling::projection;
    else if (coupling == "explicit_source") cfg.coupling = LambdaCoupling::explicit_source;
    else throw bad("direct.source_mode", "must be projection | explicit_source");
    get_i("direct.sample_every", cfg.sample_every);

    get_d("rescale.t_end", cfg.rescale_t_end);
    get_i("rescale.num_samples", cfg.map_samples);
    get_d("rescale.ode_tol", cfg.ode_tol);
    get_d("rescale.route_tol", cfg.route_tol);

    get_i("diagnostics.rho_cells", cfg.rho_cells);
    {
        const std::string v = take("diagnostics.levels");
        if (!v.empty()) {
            cfg.levels.clear();
            std::istringstream ls(v);
            double x;
            while (ls >> x) cfg.levels.push_back(x);
            if (cfg.levels.empty()) throw bad("diagnostics.levels", "needs at least one value");
        }
    }
    std::string mp = "empirical";
    get_s("diagnostics.m_policy", mp);
    if (mp == "boundedness") cfg.m_policy = MPolicy::boundedness;
    else if (mp == "empirical") cfg.m_policy = MPolicy::empirical;
    else if (mp == "fixed") cfg.m_policy = MPolicy::fixed;
    else throw bad("diagnostics.m_policy", "must be boundedness | empirical | fixed");
    get_d("diagnostics.m_fixed", cfg.m_fixed);
    get_i("diagnostics.sample_stride", cfg.diag_stride);

    get_d("talenti.lam", cfg.talenti_lam);
    get_d("talenti.mu", cfg.talenti_mu);

    get_s("output.dir", cfg.out_dir);
    get_i("output.snapshot_stride", cfg.snapshot_stride);

    if (!kv.empty()) {
        const auto& first = *kv.begin();
        throw config_error("config line " + std::to_string(first.second.line) + ": unknown field '" +
                           first.first + "'");
    }

    // Domain validation; make_params rejects (n, p) outside the hypotheses.
    try {
        (void)cfg.params();
    } catch (const parameter_error& e) {
        throw config_error(std::string("config: [params] ") + e.what());
    }
    if (cfg.points < 3) throw config_error("config: grid.points must be >= 3");
    if (cfg.mode == GridMode::cartesian_2d && cfg.points_y < 3)
        throw config_error("config: grid.points_y must be >= 3");
    if (!(cfg.extent > 0.0)) throw config_error("config: grid.extent must be positive");
    if (!(cfg.proto.ds_min <= cfg.proto.ds_init && cfg.proto.ds_init <= cfg.proto.ds_max))
        throw config_error("config: need ds_min <= ds_init <= ds_max");
    if (!(cfg.dt > 0.0)) throw config_error("config: direct.dt must be positive");
    if (cfg.talenti_mu >= 0.0) throw config_error("config: talenti.mu must be negative");
    if (!cfg.initial_file.empty() && !std::filesystem::exists(cfg.initial_file))
        throw config_error("config: initial.file does not exist: " + cfg.initial_file);
    for (double L : cfg.levels)
        if (!(L > 0.0)) throw config_error("config: diagnostics.levels must be positive");
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    if (!std::filesystem::exists(path)) throw config_error("config file does not exist: " + path);
    return parse_config(read_text_file(path));
}

/// Canonical echo of every resolved value; identical configs hash equal.
inline std::string manifest_text(const RunConfig& c) {
    std::ostringstream os;
    os << "psflow run manifest\n";
    os << "config_hash = " << std::hex << fnv1a(c.source_text) << std::dec << "\n\n";
    os << "[params]\nn = " << c.n << "\np = " << fmt_g17(c.p) << "\n";
    const FlowParams fp = c.params();
    os << "p_star = " << fmt_g17(fp.p_star) << "\nq = " << fmt_g17(fp.q)
       << "\nq1p = " << fmt_g17(fp.q1p) << "\n\n";
    os << "[grid]\nmode = " << to_string(c.mode) << "\nextent = " << fmt_g17(c.extent)
       << "\npoints = " << c.points << "\n";
    if (c.mode == GridMode::cartesian_2d)
        os << "extent_y = " << fmt_g17(c.extent_y) << "\npoints_y = " << c.points_y << "\n";
    os << "\n[initial]\npreset = " << (c.initial_file.empty() ? c.preset : "file:" + c.initial_file)
       << "\namplitude = " << fmt_g17(c.amplitude) << "\nramp = " << fmt_g17(c.ramp)
       << "\nlam = " << fmt_g17(c.lam) << "\n";
    os << "\n[prototype]\nds_init = " << fmt_g17(c.proto.ds_init)
       << "\nds_min = " << fmt_g17(c.proto.ds_min) << "\nds_max = " << fmt_g17(c.proto.ds_max)
       << "\nadaptive = " << (c.proto.adaptive ? "true" : "false")
       << "\ngamma_step_factor = " << fmt_g17(c.proto.gamma_step_factor)
       << "\nenergy_budget = " << fmt_g17(c.proto.energy_budget)
       << "\nsnapshot_cadence = " << fmt_g17(c.proto.snapshot_cadence_s)
       << "\nmax_steps = " << c.proto.max_steps << "\nnewton_tol = " << fmt_g17(c.newton_tol)
       << "\nextinction_eps = " << fmt_g17(c.extinction_eps) << "\n";
    os << "\n[direct]\ndt = " << fmt_g17(c.dt) << "\nt_end = " << fmt_g17(c.direct_t_end)
       << "\nsource_mode = "
       << (c.coupling == LambdaCoupling::projection ? "projection" : "explicit_source")
       << "\nsample_every = " << c.sample_every << "\n";
    os << "\n[rescale]\nt_end = " << fmt_g17(c.rescale_t_end)
       << "\nnum_samples = " << c.map_samples << "\node_tol = " << fmt_g17(c.ode_tol)
       << "\nroute_tol = " << fmt_g17(c.route_tol) << "\n";
    os << "\n[diagnostics]\nrho_cells = " << c.rho_cells << "\nlevels =";
    for (double L : c.levels) os << ' ' << fmt_g17(L);
    os << "\nm_policy = "
       << (c.m_policy == MPolicy::boundedness ? "boundedness"
                                              : c.m_policy == MPolicy::empirical ? "empirical" : "fixed")
       << "\nm_fixed = " << fmt_g17(c.m_fixed) << "\nsample_stride = " << c.diag_stride << "\n";
    os << "\n[talenti]\nlam = " << fmt_g17(c.talenti_lam) << "\nmu = " << fmt_g17(c.talenti_mu)
       << "\n";
    os << "\n[output]\ndir = " << c.out_dir << "\nsnapshot_stride = " << c.snapshot_stride << "\n";
    return os.str();
}

} // namespace psflow

#endif
