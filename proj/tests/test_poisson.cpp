#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "qdfss/device.hpp"
#include "qdfss/errors.hpp"
#include "qdfss/poisson.hpp"

using namespace qdfss;

namespace {

constexpr double pi = std::numbers::pi;

// phi = sin(pi x) sin(pi y) with eps = 1 + x^2 + y/2 on the unit square.
double mms_phi(double x, double y) { return std::sin(pi * x) * std::sin(pi * y); }
double mms_eps(double x, double y) { return 1.0 + x * x + 0.5 * y; }
double mms_source(double x, double y) {
    const double px = pi * std::cos(pi * x) * std::sin(pi * y);
    const double py = pi * std::sin(pi * x) * std::cos(pi * y);
    const double lap = -2.0 * pi * pi * mms_phi(x, y);
    return -(2.0 * x * px + 0.5 * py + mms_eps(x, y) * lap);
}

double mms_error(std::size_t n) {
    const Grid2D g(n, n, 1.0, 1.0, 0.5, 0.5);
    std::vector<double> eps(g.size()), src(g.size()), val(g.size(), 0.0);
    std::vector<std::uint8_t> pinned(g.size(), 0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t k = g.index(i, j);
            eps[k] = mms_eps(g.x(i), g.y(j));
            src[k] = mms_source(g.x(i), g.y(j));
            if (i == 0 || j == 0 || i + 1 == n || j + 1 == n) {
                pinned[k] = 1;
                val[k] = mms_phi(g.x(i), g.y(j));
            }
        }
    PoissonOptions opt;
    opt.rel_tolerance = 1e-12;
    const ScalarField2D phi = solve_poisson_system(g, eps, pinned, val, src, opt);
    double err = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i)
            err = std::max(err, std::abs(phi(i, j) - mms_phi(g.x(i), g.y(j))));
    return err;
}

struct Device {
    DeviceSpec spec;
    Grid2D grid;
    MaterialMap map;
    GateCells gates;
    GateResponse response;

    explicit Device(const DeviceSpec& s)
        : spec(s),
          grid(device_grid(s, 256, 200.0)),
          map(build_material_map(s, grid)),
          gates(gate_boundary_cells(s, grid)),
          response(map, gates) {}
};

const Device& elongated() {
    static const Device d{DeviceSpec{}};
    return d;
}

const Device& circular() {
    static const Device d = [] {
        DeviceSpec s;
        s.dot_elongation = 1.0;
        return Device{s};
    }();
    return d;
}

double max_abs(const ScalarField2D& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

double max_diff(const ScalarField2D& a, const ScalarField2D& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.grid().size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

}  // namespace

TEST_CASE("manufactured solution converges at second order") {
    const double e1 = mms_error(32);
    const double e2 = mms_error(64);
    const double e3 = mms_error(128);
    const double p1 = std::log2(e1 / e2);
    const double p2 = std::log2(e2 / e3);
    INFO("errors ", e1, " ", e2, " ", e3);
    CHECK(p1 >= 1.8);
    CHECK(p2 >= 1.8);
}

TEST_CASE("zero input gives an identically zero potential") {
    const Device& d = elongated();
    const ScalarField2D phi = solve_poisson(d.map, d.gates, GateVoltages{});
    for (double v : phi.values()) REQUIRE(v == 0.0);
}

TEST_CASE("superposition of unit responses matches a direct solve") {
    const Device& d = elongated();
    const GateVoltages v{0.3, -0.2, 0.7, 0.1};
    const ScalarField2D direct = solve_poisson(d.map, d.gates, v);
    const ScalarField2D sum = d.response.potential(v);
    CHECK(max_diff(direct, sum) <= 1e-6 * max_abs(direct));
}

TEST_CASE("gate cells hold their voltages and the response is odd in V") {
    const Device& d = elongated();
    const GateVoltages v = GateVoltages::quadrupole(0.5);
    const ScalarField2D phi = d.response.potential(v);
    for (Gate g : all_gates)
        for (std::size_t k : d.gates[static_cast<std::size_t>(g)]) CHECK(phi[k] == doctest::Approx(v[g]).scale(0));

    const ScalarField2D neg = d.response.potential(GateVoltages::quadrupole(-0.5));
    for (std::size_t k = 0; k < phi.grid().size(); ++k) REQUIRE(neg[k] == -phi[k]);
}

TEST_CASE("quadrupole potential keeps both mirror symmetries") {
    const Device& d = elongated();
    const ScalarField2D phi = d.response.potential(GateVoltages::quadrupole(0.5));
    const std::size_t n = d.grid.nx();
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            worst = std::max(worst, std::abs(phi(i, j) - phi(n - 1 - i, j)));
            worst = std::max(worst, std::abs(phi(i, j) - phi(i, n - 1 - j)));
        }
    CHECK(worst <= 1e-7);
}

TEST_CASE("circular dot: quadrupole is odd under a quarter turn and zero at the centre") {
    const Device& d = circular();
    const ScalarField2D phi = d.response.potential(GateVoltages::quadrupole(0.5));
    const std::size_t n = d.grid.nx();
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(phi(i, j) + phi(j, i)));
    CHECK(worst <= 1e-7);
    CHECK(std::abs(phi.sample(0.0, 0.0)) <= 1e-7);
}

TEST_CASE("field statistics are exact for a linear ramp") {
    const Device& d = elongated();
    ScalarField2D ramp(d.grid, FieldKind::potential);
    for (std::size_t j = 0; j < d.grid.ny(); ++j)
        for (std::size_t i = 0; i < d.grid.nx(); ++i) ramp(i, j) = 0.01 * d.grid.x(i) - 0.02 * d.grid.y(j);
    const double expected = std::hypot(0.01, 0.02);
    for (Region r : {Region::dot, Region::shell, Region::dielectric}) {
        const auto s = field_magnitude_stats(ramp, d.map, r);
        CHECK(s.cells == d.map.count(r));
        CHECK(s.mean_V_per_nm == doctest::Approx(expected).scale(0).epsilon(1e-9));
        CHECK(s.max_V_per_nm == doctest::Approx(expected).scale(0).epsilon(1e-9));
    }
}

TEST_CASE("quadrupole field is much weaker in the dot than in the shell") {
    const Device& d = elongated();
    const ScalarField2D phi = d.response.potential(GateVoltages::quadrupole(0.5));
    const auto dot = interior_field_magnitude(phi, d.map);
    const auto shell = field_magnitude_stats(phi, d.map, Region::shell);
    CHECK(dot.mean_V_per_nm * 5.0 < shell.mean_V_per_nm);
}

TEST_CASE("iteration cap raises SolverError with the residual") {
    const Device& d = elongated();
    PoissonOptions opt;
    opt.max_iterations = 2;
    try {
        solve_poisson(d.map, d.gates, GateVoltages::lateral(0.3), nullptr, opt);
        FAIL("expected SolverError");
    } catch (const SolverError& e) {
        CHECK(e.final_residual() > opt.rel_tolerance);
    }
}

TEST_CASE("non-finite voltages are rejected") {
    const Device& d = elongated();
    GateVoltages v;
    v.left = std::nan("");
    CHECK_THROWS_AS(solve_poisson(d.map, d.gates, v), std::invalid_argument);
}
