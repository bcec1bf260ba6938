#include "qdfss/excitonics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "qdfss/constants.hpp"
#include "qdfss/errors.hpp"

namespace qdfss {

namespace {

// Runs one pipeline stage, prefixing any failure with the stage name while
// keeping the exception category (the CLI maps categories to exit codes).
template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const SolverError& e) {
        throw SolverError(std::string(name) + ": " + e.what(), e.final_residual(),
                          e.residual_history());
    } catch (const GeometryError& e) {
        throw GeometryError(std::string(name) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string(name) + ": " + e.what());
    }
}

}  // namespace

GaussianMoments moments_fit(const ScalarField2D& field, WeightMode mode) {
    const Grid2D& g = field.grid();
    double w0 = 0.0, wx = 0.0, wy = 0.0;
    for (std::size_t j = 0; j < g.ny(); ++j) {
        for (std::size_t i = 0; i < g.nx(); ++i) {
            double w = field(i, j);
            if (mode == WeightMode::amplitude) {
                w *= w;
            } else if (w < 0.0) {
                throw std::invalid_argument("moments_fit: negative weight in density mode");
            }
            w0 += w;
            wx += w * g.x(i);
            wy += w * g.y(j);
        }
    }
    if (!(w0 > 0.0)) throw std::invalid_argument("moments_fit: total weight is zero");

    GaussianMoments m;
    m.centroid_x_nm = wx / w0;
    m.centroid_y_nm = wy / w0;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t j = 0; j < g.ny(); ++j) {
        const double dy = g.y(j) - m.centroid_y_nm;
        for (std::size_t i = 0; i < g.nx(); ++i) {
            double w = field(i, j);
            if (mode == WeightMode::amplitude) w *= w;
            const double dx = g.x(i) - m.centroid_x_nm;
            sxx += w * dx * dx;
            syy += w * dy * dy;
            sxy += w * dx * dy;
        }
    }
    m.cov_xx = sxx / w0;
    m.cov_yy = syy / w0;
    m.cov_xy = sxy / w0;

    const double mean = 0.5 * (m.cov_xx + m.cov_yy);
    const double half_diff = 0.5 * (m.cov_xx - m.cov_yy);
    const double radius = std::hypot(half_diff, m.cov_xy);
    const double lambda_major = mean + radius;
    const double lambda_minor = mean - radius;
    if (!(lambda_minor > 1e-12 * lambda_major) || !(m.cov_xx > 0.0) || !(m.cov_yy > 0.0))
        throw std::invalid_argument("moments_fit: degenerate covariance");

    m.sigma_major_nm = std::sqrt(lambda_major);
    m.sigma_minor_nm = std::sqrt(lambda_minor);
    double angle = 0.5 * std::atan2(2.0 * m.cov_xy, m.cov_xx - m.cov_yy) * 180.0 / constants::pi;
    if (angle <= -90.0) angle += 180.0;
    m.angle_deg = angle;
    m.sigma_x_nm = std::sqrt(m.cov_xx);
    m.sigma_y_nm = std::sqrt(m.cov_yy);
    m.elongation = m.sigma_x_nm / m.sigma_y_nm;
    return m;
}

double overlap_beta(const ScalarField2D& psi_e, const ScalarField2D& psi_h) {
    require_same_grid(psi_e.grid(), psi_h.grid(), "overlap_beta");
    double s = 0.0;
    const auto e = psi_e.values();
    const auto h = psi_h.values();
    for (std::size_t k = 0; k < e.size(); ++k) s += e[k] * h[k];
    s *= psi_e.grid().cell_area();
    return s * s;
}

HybridLengths hybridized_lengths(const ScalarField2D& psi_e, const ScalarField2D& psi_h,
                                 double reference_axis_deg) {
    require_same_grid(psi_e.grid(), psi_h.grid(), "hybridized_lengths");
    ScalarField2D product(psi_e.grid(), FieldKind::wavefunction);
    for (std::size_t k = 0; k < product.grid().size(); ++k) product[k] = psi_h[k] * psi_e[k];

    HybridLengths out;
    out.moments = moments_fit(product, WeightMode::amplitude);
    const double l_major = std::sqrt(2.0) * out.moments.sigma_major_nm;
    const double l_minor = std::sqrt(2.0) * out.moments.sigma_minor_nm;

    // Variance along the reference axis minus variance across it is
    // (lambda_major - lambda_minor) cos(2 (angle - reference)); non-negative
    // exactly when the major axis is the one nearer the reference.
    const double rad = reference_axis_deg * constants::pi / 180.0;
    const double c2 = std::cos(2.0 * rad);
    const double s2 = std::sin(2.0 * rad);
    const GaussianMoments& m = out.moments;
    const double projected = (m.cov_xx - m.cov_yy) * c2 + 2.0 * m.cov_xy * s2;
    if (projected >= 0.0) {
        out.l_x_nm = l_major;
        out.l_y_nm = l_minor;
    } else {
        out.l_x_nm = l_minor;
        out.l_y_nm = l_major;
    }
    out.xi = out.l_y_nm / out.l_x_nm;
    return out;
}

double exchange_constant_ueV_nm3(const MaterialParams& materials) {
    const double hbar2_over_m0 = 2.0 * constants::hbar2_over_2m0;  // eV nm^2
    const double k_eV_nm3 = 3.0 * std::sqrt(constants::pi) * constants::coulomb_eV_nm *
                            hbar2_over_m0 * materials.kane_energy_eV /
                            (16.0 * std::sqrt(2.0) * materials.rel_permittivity *
                             materials.bulk_gap_eV * materials.bulk_gap_eV);
    return k_eV_nm3 * 1e6;
}

FssValue compute_fss(const MaterialParams& materials, double beta, double xi, double l_y_nm) {
    if (!std::isfinite(beta) || !std::isfinite(xi) || !std::isfinite(l_y_nm))
        throw std::invalid_argument("compute_fss: non-finite input");
    if (!(l_y_nm > 0.0)) throw std::invalid_argument("compute_fss: l_y must be positive");
    constexpr double gamma_z = 1.0;
    FssValue v;
    v.delta_ueV = exchange_constant_ueV_nm3(materials) * beta * xi * (1.0 - xi) * gamma_z /
                  (l_y_nm * l_y_nm * l_y_nm);
    v.fss_ueV = 2.0 * std::abs(v.delta_ueV);
    return v;
}

namespace {

SimulationOptions checked(SimulationOptions o) {
    if (!(o.window_spacing_nm > 0.0) || !(o.window_half_width_nm > o.window_spacing_nm))
        throw std::invalid_argument("carrier window must be larger than its spacing");
    if (!(o.hartree_mixing > 0.0 && o.hartree_mixing <= 1.0))
        throw std::invalid_argument("hartree_mixing must lie in (0, 1]");
    return o;
}

Grid2D make_window(const SimulationOptions& o) {
    const auto n = static_cast<std::size_t>(
        std::llround(2.0 * o.window_half_width_nm / o.window_spacing_nm));
    return Grid2D::from_spacing(n, n, o.window_spacing_nm);
}

}  // namespace

DeviceSimulator::DeviceSimulator(const DeviceSpec& spec, SimulationOptions options)
    : DeviceSimulator(spec, device_grid(spec, options.grid_cells, options.margin_nm), options) {}

DeviceSimulator::DeviceSimulator(const DeviceSpec& spec, const Grid2D& grid,
                                 SimulationOptions options)
    : spec_(spec), grid_(grid), options_(checked(options)) {
    stage("device model", [&] {
        spec_.validate();
        device_map_ = build_material_map(spec_, grid_);
        gate_cells_ = gate_boundary_cells(spec_, grid_);
        window_ = make_window(options_);
        window_map_ = build_material_map(spec_, window_);
        if (window_.extent_x() > grid_.extent_x())
            throw GeometryError("carrier window is larger than the Poisson grid");
        return 0;
    });
    if (!options_.hartree) {
        response_ = stage("poisson", [&] {
            return std::make_unique<GateResponse>(device_map_, gate_cells_, options_.poisson);
        });
    }
}

ScalarField2D DeviceSimulator::potential(const GateVoltages& gates) const {
    if (!gates.all_finite()) throw std::invalid_argument("gate voltages must be finite");
    return stage("poisson", [&] {
        if (response_) return response_->potential(gates);
        return solve_poisson(device_map_, gate_cells_, gates, nullptr, options_.poisson);
    });
}

Evaluation DeviceSimulator::carriers(const GateVoltages& gates, ScalarField2D potential) const {
    Evaluation ev;
    ev.window_potential = potential.resampled(window_);
    ev.potential = std::move(potential);

    const ScalarField2D guess = gaussian_guess(window_, 0.0, 0.0, spec_.dot_radius_mean_nm);
    auto solve_one = [&](CarrierKind kind) {
        return stage(kind.tag == Carrier::electron ? "schrodinger (electron)"
                                                   : "schrodinger (heavy hole)",
                     [&] {
                         const Hamiltonian h = build_hamiltonian(window_map_, ev.window_potential, kind);
                         EigenResult r = ground_state(h, &guess, options_.eigen);
                         if (r.edge_amplitude_ratio > options_.max_edge_amplitude_ratio) {
                             std::ostringstream msg;
                             msg << "wavefunction reaches the carrier window edge (edge/peak = "
                                 << r.edge_amplitude_ratio << "); enlarge window_half_width_nm";
                             throw SolverError(msg.str(), r.residual);
                         }
                         return r;
                     });
    };
    ev.electron = solve_one(CarrierKind::electron());
    ev.hole = solve_one(CarrierKind::heavy_hole());

    stage("excitonics", [&] {
        const ScalarField2D& pe = ev.electron.wavefunction;
        const ScalarField2D& ph = ev.hole.wavefunction;
        ExcitonReport& r = ev.report;
        r.gates = gates;
        r.beta = overlap_beta(pe, ph);
        const HybridLengths hl = hybridized_lengths(pe, ph, spec_.dot_axis_angle_deg);
        r.xi = hl.xi;
        r.l_x_eh_nm = hl.l_x_nm;
        r.l_y_eh_nm = hl.l_y_nm;
        r.hybrid_angle_deg = hl.moments.angle_deg;
        r.eps_e = moments_fit(pe, WeightMode::amplitude).elongation;
        r.eps_h = moments_fit(ph, WeightMode::amplitude).elongation;
        const FssValue f = compute_fss(spec_.materials_dot, r.beta, r.xi, r.l_y_eh_nm);
        r.delta_ueV = f.delta_ueV;
        r.fss_ueV = f.fss_ueV;
        r.electron_energy_eV = ev.electron.energy_eV;
        r.hole_energy_eV = ev.hole.energy_eV;
        r.electron_residual_eV = ev.electron.residual;
        r.hole_residual_eV = ev.hole.residual;
        return 0;
    });
    return ev;
}

Evaluation DeviceSimulator::solve(const GateVoltages& gates) const {
    if (!options_.hartree) return carriers(gates, potential(gates));

    // Hartree loop: potential <-> net carrier density of one electron and one
    // heavy hole, with linear under-relaxation.
    ScalarField2D phi = stage("poisson", [&] {
        return solve_poisson(device_map_, gate_cells_, gates, nullptr, options_.poisson);
    });
    const double h2_window = window_.cell_area();
    const double h2_device = grid_.cell_area();
    for (std::size_t it = 1; it <= options_.hartree_max_iterations; ++it) {
        Evaluation ev = carriers(gates, phi);
        ScalarField2D density(grid_, FieldKind::density);
        for (std::size_t j = 0; j < window_.ny(); ++j) {
            for (std::size_t i = 0; i < window_.nx(); ++i) {
                const double he = ev.hole.wavefunction(i, j);
                const double el = ev.electron.wavefunction(i, j);
                const double charge = (he * he - el * el) * h2_window;
                const double fi = (window_.x(i) - grid_.center_x()) / grid_.spacing() +
                                  0.5 * static_cast<double>(grid_.nx());
                const double fj = (window_.y(j) - grid_.center_y()) / grid_.spacing() +
                                  0.5 * static_cast<double>(grid_.ny());
                const auto di = static_cast<std::size_t>(std::floor(fi));
                const auto dj = static_cast<std::size_t>(std::floor(fj));
                density(di, dj) += charge / h2_device;
            }
        }
        const ScalarField2D solved = stage("poisson", [&] {
            return solve_poisson(device_map_, gate_cells_, gates, &density, options_.poisson);
        });
        double change = 0.0;
        for (std::size_t k = 0; k < phi.grid().size(); ++k) {
            const double next = phi[k] + options_.hartree_mixing * (solved[k] - phi[k]);
            change = std::max(change, std::abs(next - phi[k]));
            phi[k] = next;
        }
        if (change < options_.hartree_tolerance_V) {
            Evaluation out = carriers(gates, phi);
            out.report.hartree_iterations = it;
            return out;
        }
    }
    std::ostringstream msg;
    msg << "self-consistency: Hartree loop did not settle within "
        << options_.hartree_max_iterations << " iterations";
    throw SolverError(msg.str(), 0.0);
}

ExcitonReport evaluate_configuration(const DeviceSpec& spec, const Grid2D& grid,
                                     const GateVoltages& gates, const SimulationOptions& options) {
    return DeviceSimulator(spec, grid, options).evaluate(gates);
}

}  // namespace qdfss
