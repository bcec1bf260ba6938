#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>
#include <string>

#include "qdfss/config.hpp"
#include "qdfss/errors.hpp"
#include "qdfss/io.hpp"

using namespace qdfss;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("empty text gives the reference defaults") {
    const RunConfig c = parse_config("");
    CHECK(c == RunConfig{});
    CHECK(c.device.dot_radius_mean_nm == 15.0);
    CHECK(c.device.shell_thickness_nm == 110.0);
    CHECK(c.device.dielectric_thickness_nm == 150.0);
    CHECK(c.device.gate_arc_width_nm == 200.0);
    CHECK(c.device.dot_elongation == 1.07);
    CHECK(c.optimize.options.seed == 0);
}

TEST_CASE("written defaults parse back identically") {
    std::ostringstream out;
    write_config(out, RunConfig{});
    CHECK(parse_config(out.str()) == RunConfig{});
}

TEST_CASE("non-default values round-trip") {
    RunConfig c;
    c.device.dot_axis_angle_deg = 20.0;
    c.device.materials_shell.cb_offset_eV = 0.1 + 0.2;  // not exactly representable in short form
    c.simulation.grid_cells = 300;
    c.simulation.hartree = true;
    c.simulation.poisson.preconditioner = Preconditioner::jacobi;
    c.sweep.options.workers = 5;
    c.optimize.options.seed = 18446744073709551615ull;
    c.optimize.bounds.lower.delta_v_rl = -1.0 / 3.0;
    c.output.directory = "out dir";
    std::ostringstream out;
    write_config(out, c);
    const RunConfig back = parse_config(out.str());
    CHECK(back == c);

    std::ostringstream again;
    write_config(again, back);
    CHECK(again.str() == out.str());
}

TEST_CASE("partial files keep the other defaults") {
    const RunConfig c = parse_config(
        "# comment\n"
        "[device]\n"
        "dot_axis_angle_deg = 10   \n"
        "\n"
        "; another comment\n"
        "[sweep]\n"
        "workers=2\r\n");
    RunConfig expected;
    expected.device.dot_axis_angle_deg = 10.0;
    expected.sweep.options.workers = 2;
    CHECK(c == expected);
}

TEST_CASE("errors name the offending key") {
    CHECK(error_of("[device]\nshell_thiknes_nm = 3\n").find("device.shell_thiknes_nm") != std::string::npos);
    CHECK(error_of("[devise]\n").find("devise") != std::string::npos);
    CHECK(error_of("[device]\ndot_elongation = 1.1\ndot_elongation = 1.2\n").find("repeated") != std::string::npos);
    CHECK(error_of("[grid]\ncells = -4\n").find("grid.cells") != std::string::npos);
    CHECK(error_of("[grid]\ncells = 12.5\n").find("grid.cells") != std::string::npos);
    CHECK(error_of("[device]\ndot_elongation = abc\n").find("device.dot_elongation") != std::string::npos);
    CHECK(error_of("[device]\ndot_elongation = inf\n").find("device.dot_elongation") != std::string::npos);
    CHECK(error_of("[solver]\nhartree = yes\n").find("solver.hartree") != std::string::npos);
    CHECK(error_of("dot_elongation = 1\n").find("before any section") != std::string::npos);
    CHECK(error_of("[device]\njust text\n").find("line 2") != std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/run.ini"), ConfigError);
}

TEST_CASE("JSON numbers carry nine significant digits") {
    CHECK(round9(1.0 / 3.0) == 0.333333333);
    CHECK(round9(0.0) == 0.0);
    ExcitonReport r;
    r.fss_ueV = 2.0 / 3.0;
    r.gates = GateVoltages::quadrupole(0.5);
    const auto j = to_json(r);
    CHECK(j.at("fss_ueV").dump() == "0.666666667");
    CHECK(j.at("v_top_V").get<double>() == -0.5);
    for (const char* key : {"fss_ueV", "delta_ueV", "beta", "xi", "l_x_eh_nm", "l_y_eh_nm", "eps_e", "eps_h",
                            "v_top_V", "v_bottom_V", "v_left_V", "v_right_V"})
        CHECK(j.contains(key));
}

TEST_CASE("sweep CSV layout") {
    SweepResult r;
    r.parameter_names = {"v_V"};
    SweepRecord ok;
    ok.parameters = {0.25};
    ExcitonReport rep;
    rep.fss_ueV = 1.5;
    rep.beta = 0.99;
    ok.report = rep;
    SweepRecord bad;
    bad.parameters = {0.5};
    bad.status = "error: solver, \"stalled\"";
    r.records = {ok, bad};
    std::ostringstream out;
    write_sweep_csv(out, r);
    const std::string csv = out.str();
    CHECK(csv.rfind("v_V,fss_ueV,beta,xi,l_x_eh_nm,l_y_eh_nm,eps_e,eps_h,status\n", 0) == 0);
    CHECK(csv.find("0.25,1.5,0.99,1,0,0,1,1,ok\n") != std::string::npos);
    CHECK(csv.find("0.5,,,,,,,,\"error: solver, \"\"stalled\"\"\"\n") != std::string::npos);
    CHECK(csv.find('\r') == std::string::npos);
}
