// qdfss: command-line driver for the gated dot simulator.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qdfss/config.hpp"
#include "qdfss/errors.hpp"
#include "qdfss/excitonics.hpp"
#include "qdfss/io.hpp"
#include "qdfss/sweep.hpp"

namespace {

using namespace qdfss;

struct GateFlags {
    std::optional<double> top, bottom, left, right;

    void add(CLI::App* app) {
        app->add_option("--v-top", top, "top gate potential (V)");
        app->add_option("--v-bottom", bottom, "bottom gate potential (V)");
        app->add_option("--v-left", left, "left gate potential (V)");
        app->add_option("--v-right", right, "right gate potential (V)");
    }
    GateVoltages apply(GateVoltages g) const {
        if (top) g.top = *top;
        if (bottom) g.bottom = *bottom;
        if (left) g.left = *left;
        if (right) g.right = *right;
        if (!g.all_finite()) throw ConfigError("gate voltages must be finite");
        return g;
    }
};

RunConfig load(const std::string& path) { return path.empty() ? RunConfig{} : load_config(path); }

DeviceSimulator make_simulator(const RunConfig& cfg) {
    return DeviceSimulator(cfg.device, cfg.simulation);
}

std::filesystem::path output_path(const RunConfig& cfg, const std::string& suffix) {
    std::filesystem::path dir(cfg.output.directory);
    std::filesystem::create_directories(dir);
    return dir / (cfg.output.prefix + suffix);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

template <class F>
std::string render(F f) {
    std::ostringstream s;
    f(s);
    return s.str();
}

int run_sweep(const RunConfig& cfg, const std::string& mode) {
    const auto sim = make_simulator(cfg);
    const auto& s = cfg.sweep;
    SweepResult result;
    if (mode == "quadrupole")
        result = sweep_quadrupole(sim, s.quadrupole_v_min_V, s.quadrupole_v_max_V,
                                  s.quadrupole_points, s.options);
    else if (mode == "lateral")
        result = sweep_lateral(sim, s.lateral_v_min_V, s.lateral_v_max_V, s.lateral_points,
                               s.options);
    else
        result = sweep_grid_asymmetric(sim, s.grid_v_fixed_V, s.grid_rl_min_V, s.grid_rl_max_V,
                                       s.grid_tb_min_V, s.grid_tb_max_V, s.grid_rl_points,
                                       s.grid_tb_points, s.options);

    write_file(output_path(cfg, "_sweep_" + mode + ".csv"),
               render([&](std::ostream& o) { write_sweep_csv(o, result); }));
    if (mode == "grid")
        write_file(output_path(cfg, "_sweep_grid_matrix.csv"),
                   render([&](std::ostream& o) { write_fss_matrix_csv(o, result); }));
    const std::string summary = sweep_summary(result, mode).dump(2) + "\n";
    write_file(output_path(cfg, "_sweep_" + mode + "_summary.json"), summary);
    std::cout << summary;
    return 0;
}

int run_optimize(const RunConfig& cfg) {
    const auto sim = make_simulator(cfg);
    const auto result =
        minimize_fss(sim, cfg.optimize.initial, cfg.optimize.bounds, cfg.optimize.options);
    const std::string best = to_json(result).dump(2) + "\n";
    write_file(output_path(cfg, "_optimize.json"), best);
    write_file(output_path(cfg, "_optimize_trace.csv"),
               render([&](std::ostream& o) { write_trace_csv(o, result); }));
    std::cout << best;
    return 0;
}

int run_export(const RunConfig& cfg, const GateVoltages& gates, const std::string& what,
               const std::string& out_path) {
    const auto sim = make_simulator(cfg);
    const std::string text = render([&](std::ostream& o) {
        if (what == "potential") {
            write_field_csv(o, sim.potential(gates), "phi_V");
            return;
        }
        const Evaluation ev = sim.solve(gates);
        if (what == "psi-e") write_field_csv(o, ev.electron.wavefunction, "density_per_nm2", true);
        else write_field_csv(o, ev.hole.wavefunction, "density_per_nm2", true);
    });
    if (out_path.empty()) std::cout << text;
    else write_file(out_path, text);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exciton fine-structure splitting of a gated quantum dot in a nanowire"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::size_t> workers;
    app.add_option("-c,--config", config_path, "run configuration file")->check(CLI::ExistingFile);
    app.add_option("--workers", workers, "sweep worker threads (0 = all cores)");

    GateFlags solve_flags;
    auto* solve = app.add_subcommand("solve", "solve one gate configuration, JSON report to stdout");
    solve_flags.add(solve);

    std::string mode = "quadrupole";
    auto* sweep = app.add_subcommand("sweep", "voltage sweep, CSV plus summary JSON");
    sweep->add_option("--mode", mode)->check(CLI::IsMember({"quadrupole", "lateral", "grid"}));

    auto* optimize = app.add_subcommand("optimize", "minimise FSS over (v, delta_v_rl, delta_v_tb)");

    GateFlags export_flags;
    std::string what = "potential";
    std::string export_out;
    auto* exp = app.add_subcommand("export-fields", "dump a field on its grid as CSV");
    exp->add_option("--what", what)->check(CLI::IsMember({"potential", "psi-e", "psi-h"}));
    exp->add_option("-o,--output", export_out, "file to write instead of stdout");
    export_flags.add(exp);

    auto* dump = app.add_subcommand("write-config", "print the effective configuration");

    // Config options are global so they may appear before or after the subcommand.
    for (auto* sub : {solve, sweep, optimize, exp, dump}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg = load(config_path);
        if (workers) cfg.sweep.options.workers = *workers;
        if (*dump) {
            write_config(std::cout, cfg);
            return 0;
        }
        cfg.device.validate();
        if (*solve) {
            const auto sim = make_simulator(cfg);
            std::cout << to_json(sim.evaluate(solve_flags.apply(cfg.gates))).dump(2) << "\n";
            return 0;
        }
        if (*sweep) return run_sweep(cfg, mode);
        if (*optimize) return run_optimize(cfg);
        return run_export(cfg, export_flags.apply(cfg.gates), what, export_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const GeometryError& e) {
        std::cerr << "geometry error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
