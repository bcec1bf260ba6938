#include "qdfss/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <variant>
#include <vector>

#include "qdfss/errors.hpp"

namespace qdfss {

namespace {

// uint64_t and size_t may be the same type, so the seed gets its own alternative.
struct Seed {
    std::uint64_t* p;
};

using Target = std::variant<double*, std::size_t*, Seed, bool*, std::string*, Preconditioner*>;

struct Binding {
    std::string section;
    std::string key;
    Target target;
};

void bind_material(std::vector<Binding>& b, const std::string& section, MaterialParams& m) {
    b.push_back({section, "bulk_gap_eV", &m.bulk_gap_eV});
    b.push_back({section, "kane_energy_eV", &m.kane_energy_eV});
    b.push_back({section, "eff_mass_e", &m.eff_mass_e});
    b.push_back({section, "eff_mass_hh", &m.eff_mass_hh});
    b.push_back({section, "rel_permittivity", &m.rel_permittivity});
    b.push_back({section, "cb_offset_eV", &m.cb_offset_eV});
    b.push_back({section, "vb_offset_eV", &m.vb_offset_eV});
}

void bind_param(std::vector<Binding>& b, const std::string& prefix, QuadrupoleParam& q) {
    b.push_back({"optimize", prefix + "v_V", &q.v});
    b.push_back({"optimize", prefix + "delta_v_rl_V", &q.delta_v_rl});
    b.push_back({"optimize", prefix + "delta_v_tb_V", &q.delta_v_tb});
}

// Order here is the order of the written file.
std::vector<Binding> bindings(RunConfig& c) {
    std::vector<Binding> b;
    auto& d = c.device;
    b.push_back({"device", "dot_radius_mean_nm", &d.dot_radius_mean_nm});
    b.push_back({"device", "dot_elongation", &d.dot_elongation});
    b.push_back({"device", "dot_axis_angle_deg", &d.dot_axis_angle_deg});
    b.push_back({"device", "shell_thickness_nm", &d.shell_thickness_nm});
    b.push_back({"device", "dielectric_thickness_nm", &d.dielectric_thickness_nm});
    b.push_back({"device", "gate_arc_width_nm", &d.gate_arc_width_nm});
    b.push_back({"device", "dielectric_permittivity", &d.dielectric_permittivity});
    b.push_back({"device", "exterior_permittivity", &d.exterior_permittivity});
    b.push_back({"device", "outer_barrier_eV", &d.outer_barrier_eV});
    bind_material(b, "materials.dot", d.materials_dot);
    bind_material(b, "materials.shell", d.materials_shell);

    auto& s = c.simulation;
    b.push_back({"grid", "cells", &s.grid_cells});
    b.push_back({"grid", "margin_nm", &s.margin_nm});
    b.push_back({"grid", "window_half_width_nm", &s.window_half_width_nm});
    b.push_back({"grid", "window_spacing_nm", &s.window_spacing_nm});

    b.push_back({"solver", "poisson_rel_tolerance", &s.poisson.rel_tolerance});
    b.push_back({"solver", "poisson_max_iterations", &s.poisson.max_iterations});
    b.push_back({"solver", "poisson_preconditioner", &s.poisson.preconditioner});
    b.push_back({"solver", "sheet_thickness_nm", &s.poisson.sheet_thickness_nm});
    b.push_back({"solver", "eigen_residual_tolerance_eV", &s.eigen.residual_tolerance});
    b.push_back({"solver", "eigen_krylov_dimension", &s.eigen.krylov_dimension});
    b.push_back({"solver", "eigen_max_restarts", &s.eigen.max_restarts});
    b.push_back({"solver", "max_edge_amplitude_ratio", &s.max_edge_amplitude_ratio});
    b.push_back({"solver", "hartree", &s.hartree});
    b.push_back({"solver", "hartree_mixing", &s.hartree_mixing});
    b.push_back({"solver", "hartree_tolerance_V", &s.hartree_tolerance_V});
    b.push_back({"solver", "hartree_max_iterations", &s.hartree_max_iterations});

    b.push_back({"gates", "v_top_V", &c.gates.top});
    b.push_back({"gates", "v_bottom_V", &c.gates.bottom});
    b.push_back({"gates", "v_left_V", &c.gates.left});
    b.push_back({"gates", "v_right_V", &c.gates.right});

    auto& w = c.sweep;
    b.push_back({"sweep", "quadrupole_v_min_V", &w.quadrupole_v_min_V});
    b.push_back({"sweep", "quadrupole_v_max_V", &w.quadrupole_v_max_V});
    b.push_back({"sweep", "quadrupole_points", &w.quadrupole_points});
    b.push_back({"sweep", "lateral_v_min_V", &w.lateral_v_min_V});
    b.push_back({"sweep", "lateral_v_max_V", &w.lateral_v_max_V});
    b.push_back({"sweep", "lateral_points", &w.lateral_points});
    b.push_back({"sweep", "grid_v_fixed_V", &w.grid_v_fixed_V});
    b.push_back({"sweep", "grid_rl_min_V", &w.grid_rl_min_V});
    b.push_back({"sweep", "grid_rl_max_V", &w.grid_rl_max_V});
    b.push_back({"sweep", "grid_tb_min_V", &w.grid_tb_min_V});
    b.push_back({"sweep", "grid_tb_max_V", &w.grid_tb_max_V});
    b.push_back({"sweep", "grid_rl_points", &w.grid_rl_points});
    b.push_back({"sweep", "grid_tb_points", &w.grid_tb_points});
    b.push_back({"sweep", "workers", &w.options.workers});
    b.push_back({"sweep", "refine_crossings", &w.options.refine_crossings});
    b.push_back({"sweep", "refine_tolerance_ueV", &w.options.refine_tolerance_ueV});
    b.push_back({"sweep", "max_bisections", &w.options.max_bisections});

    auto& o = c.optimize;
    bind_param(b, "initial_", o.initial);
    bind_param(b, "lower_", o.bounds.lower);
    bind_param(b, "upper_", o.bounds.upper);
    b.push_back({"optimize", "max_evaluations", &o.options.max_evaluations});
    b.push_back({"optimize", "fss_target_ueV", &o.options.fss_target_ueV});
    b.push_back({"optimize", "step_tolerance_V", &o.options.step_tolerance_V});
    b.push_back({"optimize", "initial_step_V", &o.options.initial_step_V});
    b.push_back({"optimize", "max_restarts", &o.options.max_restarts});
    b.push_back({"optimize", "seed", Seed{&o.options.seed}});

    b.push_back({"output", "directory", &c.output.directory});
    b.push_back({"output", "prefix", &c.output.prefix});
    return b;
}

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r";
    const auto a = s.find_first_not_of(ws);
    if (a == std::string_view::npos) return {};
    const auto b = s.find_last_not_of(ws);
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
    throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

template <class T>
bool parse_number(std::string_view v, T& out) {
    const auto* end = v.data() + v.size();
    const auto r = std::from_chars(v.data(), end, out);
    return r.ec == std::errc() && r.ptr == end;
}

void assign(const Target& target, std::string_view v, std::size_t line, const std::string& name) {
    auto bad = [&](const char* what) {
        fail(line, "key '" + name + "' expects " + what + ", got '" + std::string(v) + "'");
    };
    std::visit(
        [&](auto p) {
            using T = std::remove_pointer_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Seed>) {
                if (!parse_number(v, *p.p)) bad("a non-negative integer");
            } else if constexpr (std::is_same_v<T, double>) {
                if (!parse_number(v, *p) || !std::isfinite(*p)) bad("a finite number");
            } else if constexpr (std::is_same_v<T, std::size_t>) {
                if (!parse_number(v, *p)) bad("a non-negative integer");
            } else if constexpr (std::is_same_v<T, bool>) {
                if (v == "true") *p = true;
                else if (v == "false") *p = false;
                else bad("true or false");
            } else if constexpr (std::is_same_v<T, Preconditioner>) {
                if (v == "ic") *p = Preconditioner::incomplete_cholesky;
                else if (v == "jacobi") *p = Preconditioner::jacobi;
                else bad("ic or jacobi");
            } else {
                *p = std::string(v);
            }
        },
        target);
}

std::string format(const Target& target) {
    return std::visit(
        [](auto p) -> std::string {
            using T = std::remove_pointer_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Seed>) {
                return std::to_string(*p.p);
            } else if constexpr (std::is_same_v<T, double>) {
                // Shortest text that reads back to the same double.
                char buf[32];
                const auto r = std::to_chars(buf, buf + sizeof buf, *p);
                return std::string(buf, r.ptr);
            } else if constexpr (std::is_same_v<T, bool>) {
                return *p ? "true" : "false";
            } else if constexpr (std::is_same_v<T, Preconditioner>) {
                return *p == Preconditioner::jacobi ? "jacobi" : "ic";
            } else if constexpr (std::is_same_v<T, std::string>) {
                return *p;
            } else {
                return std::to_string(*p);
            }
        },
        target);
}

}  // namespace

RunConfig parse_config(std::string_view text) {
    RunConfig config;
    const auto table = bindings(config);
    std::map<std::string, const Binding*, std::less<>> lookup;
    std::set<std::string, std::less<>> sections;
    for (const auto& b : table) {
        lookup[b.section + "." + b.key] = &b;
        sections.insert(b.section);
    }

    std::set<std::string> seen;
    std::string section;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;

        if (line.front() == '[') {
            if (line.back() != ']') fail(line_no, "unterminated section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (!sections.contains(section)) fail(line_no, "unknown section '" + section + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) fail(line_no, "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        if (section.empty()) fail(line_no, "key '" + key + "' appears before any section");
        const std::string name = section + "." + key;
        const auto it = lookup.find(name);
        if (it == lookup.end()) fail(line_no, "unknown key '" + name + "'");
        if (!seen.insert(name).second) fail(line_no, "repeated key '" + name + "'");
        assign(it->second->target, value, line_no, name);
    }
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void write_config(std::ostream& out, const RunConfig& config) {
    RunConfig copy = config;
    std::string section;
    for (const auto& b : bindings(copy)) {
        if (b.section != section) {
            if (!section.empty()) out << '\n';
            section = b.section;
            out << '[' << section << "]\n";
        }
        out << b.key << " = " << format(b.target) << '\n';
    }
}

}  // namespace qdfss
