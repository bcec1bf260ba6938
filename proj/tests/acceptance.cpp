// Acceptance suite: one PASS/FAIL line per criterion. Criteria 1-5 are exact
// oracles; 6-12 run the full pipeline on the 512^2 device grid and take
// several minutes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qdfss/constants.hpp"
#include "qdfss/excitonics.hpp"
#include "qdfss/io.hpp"
#include "qdfss/poisson.hpp"
#include "qdfss/schrodinger.hpp"
#include "qdfss/sweep.hpp"

using namespace qdfss;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Detail {
public:
    template <class T>
    Detail& operator()(const std::string& name, const T& value) {
        if (!first_) s_ << ", ";
        first_ = false;
        s_ << name << '=' << value;
        return *this;
    }
    std::string str() const { return s_.str(); }

private:
    std::ostringstream s_;
    bool first_ = true;
};

// Pipeline simulators, one per dot angle, built on first use.
const DeviceSimulator& simulator(double theta_deg) {
    static std::map<double, std::unique_ptr<DeviceSimulator>> cache;
    auto& slot = cache[theta_deg];
    if (!slot) {
        DeviceSpec spec;
        spec.dot_axis_angle_deg = theta_deg;
        slot = std::make_unique<DeviceSimulator>(spec, SimulationOptions{});
    }
    return *slot;
}

SweepOptions sweep_options() {
    SweepOptions o;
    o.refine_crossings = true;
    o.refine_tolerance_ueV = 0.01;
    return o;
}

const SweepResult& quadrupole_sweep_theta0() {
    static const SweepResult r = sweep_quadrupole(simulator(0.0), -0.5, 0.7, 13, sweep_options());
    return r;
}

// Vertex of the parabola through the best sample and its two neighbours.
// Falls back to the sample itself at the ends of the range or if a
// neighbour failed.
double parabolic_minimum(const SweepResult& r, std::size_t k) {
    const double v1 = r.records[k].parameters[0];
    if (k == 0 || k + 1 >= r.records.size() || !r.records[k - 1].ok() || !r.records[k + 1].ok()) return v1;
    const double f0 = r.records[k - 1].report->fss_ueV, f1 = r.records[k].report->fss_ueV,
                 f2 = r.records[k + 1].report->fss_ueV;
    const double h = r.records[k + 1].parameters[0] - v1;
    const double curv = f0 - 2.0 * f1 + f2;
    if (!(curv > 0.0)) return v1;
    return v1 + 0.5 * h * (f0 - f2) / curv;
}

std::vector<const ZeroCrossing*> true_zeros(const SweepResult& r) {
    std::vector<const ZeroCrossing*> out;
    for (const auto& z : r.crossings)
        if (z.is_zero) out.push_back(&z);
    return out;
}

// ---------------------------------------------------------------- oracles

double mms_error(std::size_t n) {
    auto phi = [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); };
    auto eps = [](double x, double y) { return 1.0 + x * x + 0.5 * y; };
    auto src = [&](double x, double y) {
        const double px = pi * std::cos(pi * x) * std::sin(pi * y);
        const double py = pi * std::sin(pi * x) * std::cos(pi * y);
        return -(2.0 * x * px + 0.5 * py - 2.0 * pi * pi * eps(x, y) * phi(x, y));
    };
    const Grid2D g(n, n, 1.0, 1.0, 0.5, 0.5);
    std::vector<double> e(g.size()), s(g.size()), v(g.size(), 0.0);
    std::vector<std::uint8_t> pinned(g.size(), 0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t k = g.index(i, j);
            e[k] = eps(g.x(i), g.y(j));
            s[k] = src(g.x(i), g.y(j));
            if (i == 0 || j == 0 || i + 1 == n || j + 1 == n) {
                pinned[k] = 1;
                v[k] = phi(g.x(i), g.y(j));
            }
        }
    PoissonOptions opt;
    opt.rel_tolerance = 1e-12;
    const ScalarField2D sol = solve_poisson_system(g, e, pinned, v, s, opt);
    double err = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(sol(i, j) - phi(g.x(i), g.y(j))));
    return err;
}

Outcome criterion_1() {
    const double e64 = mms_error(64), e128 = mms_error(128), e256 = mms_error(256);
    const double p1 = std::log2(e64 / e128), p2 = std::log2(e128 / e256);

    const DeviceSpec spec;
    const Grid2D g = device_grid(spec, 256, 200.0);
    const MaterialMap map = build_material_map(spec, g);
    const ScalarField2D zero = solve_poisson(map, gate_boundary_cells(spec, g), GateVoltages{});
    const bool all_zero = std::all_of(zero.values().begin(), zero.values().end(), [](double v) { return v == 0.0; });

    return {p1 >= 1.8 && p2 >= 1.8 && all_zero,
            Detail()("order_64_128", p1)("order_128_256", p2)("zero_input_identically_zero", all_zero).str()};
}

Outcome criterion_2() {
    const double t = constants::hbar2_over_2m0, mass = 0.067;
    auto build = [&](const Grid2D& g, auto v) {
        std::vector<double> m(g.size(), mass), pot(g.size());
        for (std::size_t j = 0; j < g.ny(); ++j)
            for (std::size_t i = 0; i < g.nx(); ++i) pot[g.index(i, j)] = v(g.x(i), g.y(j));
        return build_hamiltonian(g, m, pot);
    };

    const double hw = 0.01;
    const double l = std::sqrt(2.0 * t / (mass * hw));
    const double k = hw * hw * mass / (4.0 * t);
    const Grid2D g = Grid2D::from_spacing(120, 120, l / 10.0);
    const auto ho = ground_state(build(g, [&](double x, double y) { return k * (x * x + y * y); }));
    const auto m = moments_fit(ho.wavefunction, WeightMode::amplitude);
    const double l_fit = std::sqrt(2.0) * std::sqrt(0.5 * (m.cov_xx + m.cov_yy));
    const double e_err = std::abs(ho.energy_eV / hw - 1.0);
    const double l_err = std::abs(l_fit / l - 1.0);

    const double j01 = 2.404825557695773, R = 10.0;
    // 1e6 eV outside makes the wall effectively hard.
    const Grid2D gw = Grid2D::from_spacing(440, 440, 0.05);
    const auto wall = ground_state(build(gw, [&](double x, double y) { return x * x + y * y <= R * R ? 0.0 : 1e6; }));
    const double b_err = std::abs(wall.energy_eV / (t * j01 * j01 / (mass * R * R)) - 1.0);

    return {e_err <= 0.005 && l_err <= 0.005 && b_err <= 0.01,
            Detail()("oscillator_energy_rel_err", e_err)("oscillator_length_rel_err", l_err)(
                "bessel_energy_rel_err", b_err).str()};
}

Outcome criterion_3() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> minor(1.5, 3.0), ratio(1.0, 4.0), angle(-80.0, 80.0);
    const Grid2D g = Grid2D::from_spacing(200, 200, 0.5);
    double worst_sigma = 0.0, worst_angle = 0.0;
    for (int n = 0; n < 1000; ++n) {
        const double sv = minor(rng), r = ratio(rng), su = sv * r, th = angle(rng);
        ScalarField2D f(g, FieldKind::density);
        const double c = std::cos(th * pi / 180), s = std::sin(th * pi / 180);
        for (std::size_t j = 0; j < g.ny(); ++j)
            for (std::size_t i = 0; i < g.nx(); ++i) {
                const double u = c * g.x(i) + s * g.y(j), v = -s * g.x(i) + c * g.y(j);
                f(i, j) = std::exp(-0.5 * (u * u / (su * su) + v * v / (sv * sv)));
            }
        const auto m = moments_fit(f, WeightMode::density);
        worst_sigma = std::max({worst_sigma, std::abs(m.sigma_major_nm / su - 1), std::abs(m.sigma_minor_nm / sv - 1)});
        if (r > 1.01) {
            double d = std::fmod(std::abs(m.angle_deg - th), 180.0);
            worst_angle = std::max(worst_angle, std::min(d, 180.0 - d));
        }
    }
    return {worst_sigma <= 1e-3 && worst_angle <= 0.5,
            Detail()("cases", 1000)("worst_sigma_rel_err", worst_sigma)("worst_angle_err_deg", worst_angle).str()};
}

Outcome criterion_4() {
    const MaterialParams m = MaterialParams::gaas();
    bool ok = compute_fss(m, 0.93, 1.0, 5.5).delta_ueV == 0.0 && compute_fss(m, 0.0, 0.9, 5.5).delta_ueV == 0.0;
    double worst_scale = 0.0;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (int n = 0; n < 200; ++n) {
        const double beta = u(rng) / 1.5, xi = u(rng), l = 3.0 + 4.0 * u(rng), s = u(rng) * 2.0;
        const FssValue a = compute_fss(m, beta, xi, l);
        const FssValue b = compute_fss(m, beta, xi, l * s);
        ok = ok && a.fss_ueV == 2.0 * std::abs(a.delta_ueV) && b.fss_ueV == 2.0 * std::abs(b.delta_ueV);
        if (a.delta_ueV != 0.0) worst_scale = std::max(worst_scale, std::abs(b.delta_ueV * s * s * s / a.delta_ueV - 1.0));
    }
    ok = ok && worst_scale <= 1e-13;
    return {ok, Detail()("zero_at_xi_1_and_beta_0", "yes")("worst_l3_scaling_rel_err", worst_scale).str()};
}

Outcome criterion_5() {
    const DeviceSimulator& sim = simulator(0.0);
    SweepOptions one;
    one.workers = 1;
    one.refine_crossings = false;
    SweepOptions four = one;
    four.workers = 4;
    auto csv = [&](const SweepOptions& o) {
        std::ostringstream s;
        write_sweep_csv(s, sweep_quadrupole(sim, -0.3, 0.5, 5, o));
        return s.str();
    };
    const std::string a = csv(one), b = csv(four), c = csv(one);

    OptimizeBounds bounds;
    OptimizeOptions oo;
    oo.max_evaluations = 8;
    oo.seed = 0;
    auto opt = [&] {
        const auto r = minimize_fss(sim, {0.2, 0.0, 0.0}, bounds, oo);
        std::ostringstream s;
        write_trace_csv(s, r);
        return s.str() + to_json(r).dump();
    };
    const std::string o1 = opt(), o2 = opt();
    return {a == b && a == c && o1 == o2,
            Detail()("sweep_csv_workers_1_vs_4_identical", a == b)("sweep_csv_repeat_identical", a == c)(
                "optimizer_outputs_identical", o1 == o2).str()};
}

// ---------------------------------------------------------------- full device

Outcome criterion_6() {
    const ExcitonReport r = simulator(0.0).evaluate(GateVoltages{});
    return {r.fss_ueV >= 5.5 && r.fss_ueV <= 16.5 && r.delta_ueV > 0.0,
            Detail()("fss_ueV", r.fss_ueV)("target", "11 +- 50%")("delta_ueV", r.delta_ueV)("beta", r.beta).str()};
}

Outcome criterion_7() {
    const SweepResult& r = quadrupole_sweep_theta0();
    double min_beta = 1.0;
    bool all_ok = true;
    for (const auto& rec : r.records) {
        all_ok = all_ok && rec.ok();
        if (rec.ok()) min_beta = std::min(min_beta, rec.report->beta);
    }
    const auto zeros = true_zeros(r);
    Detail d;
    d("points", r.records.size())("sign_changes", r.crossings.size())("zero_crossings", zeros.size());
    if (zeros.size() == 1) d("zero_at_v", *zeros[0]->refined)("fss_at_zero_ueV", zeros[0]->refined_fss_ueV);
    d("min_beta", min_beta);
    return {all_ok && zeros.size() == 1 && r.crossings.size() == 1 && min_beta > 0.97, d.str()};
}

Outcome criterion_8() {
    const SweepResult r = sweep_lateral(simulator(0.0), 0.0, 0.4, 9, sweep_options());
    const auto zeros = true_zeros(r);
    const auto qzeros = true_zeros(quadrupole_sweep_theta0());
    Detail d;
    d("zero_crossings", zeros.size());
    if (zeros.size() != 1 || qzeros.size() != 1) return {false, d.str()};
    const double v = *zeros[0]->refined, beta = zeros[0]->refined_beta, qbeta = qzeros[0]->refined_beta;
    d("zero_at_v", v)("target_v", "0.225 +- 0.1")("beta_at_zero", beta)("target_beta", "[0.6, 0.85]")(
        "quadrupole_beta_at_zero", qbeta);
    return {std::abs(v - 0.225) <= 0.1 && beta >= 0.6 && beta <= 0.85 && beta < qbeta, d.str()};
}

Outcome criterion_9() {
    const DeviceSimulator& sim = simulator(0.0);
    // Quadrupole -0.5 V has the top and bottom gates positive.
    const ExcitonReport a = sim.evaluate(GateVoltages::quadrupole(-0.5));
    const ExcitonReport e = sim.evaluate(GateVoltages::quadrupole(0.7));
    const bool opposite = (a.eps_h - 1.0) * (e.eps_h - 1.0) < 0.0;
    const bool hole_more_a = std::abs(a.eps_h - 1.0) > std::abs(a.eps_e - 1.0);
    const bool hole_more_e = std::abs(e.eps_h - 1.0) > std::abs(e.eps_e - 1.0);
    const bool numeric = std::abs(a.eps_h - 1.17) <= 0.1 && std::abs(a.eps_e - 0.96) <= 0.1 &&
                         std::abs(e.eps_h - 0.90) <= 0.1 && std::abs(e.eps_e - 1.06) <= 0.1;
    return {opposite && hole_more_a && hole_more_e && numeric,
            Detail()("v-0.5_eps_h", a.eps_h)("v-0.5_eps_e", a.eps_e)("v+0.7_eps_h", e.eps_h)("v+0.7_eps_e", e.eps_e)(
                "opposite_hole_trend", opposite)("hole_perturbed_more_at_-0.5", hole_more_a)(
                "hole_perturbed_more_at_+0.7", hole_more_e)("numeric_targets_within_0.1", numeric).str()};
}

Outcome criterion_10() {
    Detail d;
    bool ok = true_zeros(quadrupole_sweep_theta0()).size() == 1;
    d("theta0_reaches_zero", ok);
    for (double theta : {10.0, 20.0}) {
        const SweepResult r = sweep_quadrupole(simulator(theta), 0.0, 0.9, 19, sweep_options());
        const std::size_t zeros = true_zeros(r).size();
        const bool have_min = r.min_fss_index.has_value();
        const double v_min = have_min ? r.records[*r.min_fss_index].parameters[0] : NAN;
        const double fss_min = have_min ? r.records[*r.min_fss_index].report->fss_ueV : NAN;
        const double v_vertex = have_min ? parabolic_minimum(r, *r.min_fss_index) : NAN;
        const std::string tag = "theta" + std::to_string(static_cast<int>(theta));
        d(tag + "_zero_crossings", zeros)(tag + "_min_fss_ueV", fss_min)(tag + "_min_sample_v", v_min)(
            tag + "_min_interpolated_v", v_vertex);
        ok = ok && have_min && zeros == 0 && fss_min > 0.1 && std::abs(v_vertex - 0.5) <= 0.15;
    }
    return {ok, d.str()};
}

Outcome criterion_11() {
    const DeviceSimulator& sim = simulator(20.0);
    // The quadrupole part stays at 0.5 V, as in the asymmetric-tuning map.
    OptimizeBounds b;
    b.lower = {0.5, -0.3, -0.3};
    b.upper = {0.5, 0.3, 0.3};
    OptimizeOptions o;
    o.fss_target_ueV = 0.01;
    o.max_evaluations = 200;
    const OptimizeResult r = minimize_fss(sim, {0.5, 0.0, 0.0}, b, o);
    const double drl = r.best.delta_v_rl, dtb = r.best.delta_v_tb;
    const bool fss_ok = r.report.fss_ueV <= 0.5;
    const bool beta_ok = r.report.beta >= 0.85;
    const bool where_ok = std::abs(drl - 0.095) <= 0.05 && std::abs(dtb - 0.085) <= 0.05;
    return {fss_ok && beta_ok && where_ok,
            Detail()("fss_ueV", r.report.fss_ueV)("beta", r.report.beta)("delta_v_rl", drl)("delta_v_tb", dtb)(
                "target", "(0.095, 0.085) +- 0.05")("evaluations", r.trace.size())("reason", r.reason).str()};
}

Outcome criterion_12() {
    const DeviceSimulator& sim = simulator(0.0);
    const ScalarField2D phi = sim.potential(GateVoltages::quadrupole(0.5));
    const auto dot = interior_field_magnitude(phi, sim.device_map());
    const auto shell = field_magnitude_stats(phi, sim.device_map(), Region::shell);
    const double ratio = shell.mean_V_per_nm / dot.mean_V_per_nm;
    return {ratio >= 5.0, Detail()("dot_mean_field_V_per_nm", dot.mean_V_per_nm)(
                              "shell_mean_field_V_per_nm", shell.mean_V_per_nm)("shell_over_dot", ratio).str()};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"Poisson manufactured-solution order and zero input", criterion_1},
        {"Schrodinger oscillator and hard-wall oracles", criterion_2},
        {"Gaussian moments round trip", criterion_3},
        {"FSS algebraic invariants", criterion_4},
        {"determinism and worker-count independence", criterion_5},
        {"zero-bias FSS", criterion_6},
        {"quadrupole sweep: one zero, high overlap", criterion_7},
        {"lateral sweep zero and overlap", criterion_8},
        {"single-particle elongation trends", criterion_9},
        {"misaligned dot: FSS floor and its position", criterion_10},
        {"asymmetric fine tuning at 20 degrees", criterion_11},
        {"quadrupole field flat inside the dot", criterion_12},
    };
    std::cout << std::setprecision(6);
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = criteria[k].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += out.pass ? 0 : 1;
        std::cout << (out.pass ? "PASS" : "FAIL") << " criterion " << k + 1 << ": " << criteria[k].first << " ("
                  << out.detail << ") [" << std::fixed << std::setprecision(1) << secs << " s]"
                  << std::defaultfloat << std::setprecision(6) << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
