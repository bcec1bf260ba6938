#include "qdfss/device.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include "qdfss/constants.hpp"
#include "qdfss/errors.hpp"

namespace qdfss {

namespace {

// cos/sin of an angle in degrees, exact at multiples of 90 degrees so that
// rotated maps are bit-identical to transposed ones.
std::pair<double, double> cos_sin_deg(double deg) {
    const double q = deg / 90.0;
    if (q == std::round(q)) {
        const long k = ((static_cast<long>(std::round(q)) % 4) + 4) % 4;
        constexpr double c[4] = {1.0, 0.0, -1.0, 0.0};
        constexpr double s[4] = {0.0, 1.0, 0.0, -1.0};
        return {c[k], s[k]};
    }
    const double rad = deg * constants::pi / 180.0;
    return {std::cos(rad), std::sin(rad)};
}

void require_positive(double v, const char* name, std::string_view label) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument(std::string(label) + "." + name + " must be positive and finite");
}

}  // namespace

MaterialParams MaterialParams::gaas() { return {}; }

MaterialParams MaterialParams::algaas_shell() {
    MaterialParams m;
    m.bulk_gap_eV = 1.519 + 1.247 * 0.33;
    m.kane_energy_eV = 23.0;
    m.eff_mass_e = 0.067 + 0.083 * 0.33;
    m.eff_mass_hh = 0.5 + 0.26 * 0.33;
    m.rel_permittivity = 12.9 - 2.84 * 0.33;
    m.cb_offset_eV = 0.27;
    m.vb_offset_eV = 0.14;
    return m;
}

void MaterialParams::validate(std::string_view label) const {
    require_positive(bulk_gap_eV, "bulk_gap_eV", label);
    require_positive(kane_energy_eV, "kane_energy_eV", label);
    require_positive(eff_mass_e, "eff_mass_e", label);
    require_positive(eff_mass_hh, "eff_mass_hh", label);
    if (!(rel_permittivity >= 1.0))
        throw std::invalid_argument(std::string(label) + ".rel_permittivity must be >= 1");
    if (!(cb_offset_eV >= 0.0) || !(vb_offset_eV >= 0.0))
        throw std::invalid_argument(std::string(label) + ": band offsets must be non-negative");
}

double DeviceSpec::dot_semi_major_nm() const noexcept {
    return 2.0 * dot_radius_mean_nm * dot_elongation / (1.0 + dot_elongation);
}

double DeviceSpec::dot_semi_minor_nm() const noexcept {
    return 2.0 * dot_radius_mean_nm / (1.0 + dot_elongation);
}

void DeviceSpec::validate() const {
    require_positive(dot_radius_mean_nm, "dot_radius_mean_nm", "device");
    require_positive(dot_elongation, "dot_elongation", "device");
    require_positive(shell_thickness_nm, "shell_thickness_nm", "device");
    require_positive(dielectric_thickness_nm, "dielectric_thickness_nm", "device");
    require_positive(gate_arc_width_nm, "gate_arc_width_nm", "device");
    if (!std::isfinite(dot_axis_angle_deg))
        throw std::invalid_argument("device.dot_axis_angle_deg must be finite");
    if (!(dielectric_permittivity >= 1.0) || !(exterior_permittivity >= 1.0))
        throw std::invalid_argument("device: permittivities must be >= 1");
    materials_dot.validate("materials_dot");
    materials_shell.validate("materials_shell");

    const double a = std::max(dot_semi_major_nm(), dot_semi_minor_nm());
    if (!(a < shell_radius_nm())) {
        std::ostringstream msg;
        msg << "dot ellipse (semi-major " << a << " nm) exceeds the shell circle (radius "
            << shell_radius_nm() << " nm)";
        throw GeometryError(msg.str());
    }
    if (!(shell_radius_nm() < dielectric_radius_nm()))
        throw GeometryError("shell circle is not contained in the dielectric circle");
    const double circumference = 2.0 * constants::pi * dielectric_radius_nm();
    if (4.0 * gate_arc_width_nm > circumference * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "gate arcs overlap: 4 x " << gate_arc_width_nm
            << " nm exceeds the dielectric circumference " << circumference << " nm";
        throw GeometryError(msg.str());
    }
}

Grid2D device_grid(const DeviceSpec& spec, std::size_t n, double margin_nm) {
    if (margin_nm < spec.gate_arc_width_nm)
        throw GeometryError("grid margin must be at least one gate width");
    const double extent = 2.0 * (spec.dielectric_radius_nm() + margin_nm);
    return Grid2D(n, n, extent, extent);
}

void require_grid_covers_device(const DeviceSpec& spec, const Grid2D& grid) {
    const double need = spec.dielectric_radius_nm() + spec.gate_arc_width_nm;
    const double tol = 1e-9 * need;
    const double half_x = 0.5 * grid.extent_x();
    const double half_y = 0.5 * grid.extent_y();
    if (half_x - std::abs(grid.center_x()) + tol < need ||
        half_y - std::abs(grid.center_y()) + tol < need) {
        std::ostringstream msg;
        msg << "grid does not cover the dielectric circle plus one gate width (need half-extent >= "
            << need << " nm)";
        throw GeometryError(msg.str());
    }
}

std::string_view to_string(Region region) {
    switch (region) {
        case Region::dot: return "dot";
        case Region::shell: return "shell";
        case Region::dielectric: return "dielectric";
        case Region::exterior: return "exterior";
    }
    return "unknown";
}

std::string_view to_string(Gate gate) {
    switch (gate) {
        case Gate::top: return "top";
        case Gate::bottom: return "bottom";
        case Gate::left: return "left";
        case Gate::right: return "right";
    }
    return "unknown";
}

std::size_t MaterialMap::count(Region r) const noexcept {
    return static_cast<std::size_t>(std::count(region.begin(), region.end(), r));
}

MaterialMap build_material_map(const DeviceSpec& spec, const Grid2D& grid) {
    spec.validate();

    const auto [c, s] = cos_sin_deg(spec.dot_axis_angle_deg);
    const double a = spec.dot_semi_major_nm();
    const double b = spec.dot_semi_minor_nm();
    const double r_shell2 = spec.shell_radius_nm() * spec.shell_radius_nm();
    const double r_diel2 = spec.dielectric_radius_nm() * spec.dielectric_radius_nm();
    const MaterialParams& dot = spec.materials_dot;
    const MaterialParams& shell = spec.materials_shell;

    MaterialMap map;
    map.grid = grid;
    const std::size_t n = grid.size();
    map.region.resize(n);
    map.permittivity.resize(n);
    map.mass_e.resize(n);
    map.mass_hh.resize(n);
    map.cb_edge_eV.resize(n);
    map.vb_edge_eV.resize(n);

    for (std::size_t j = 0; j < grid.ny(); ++j) {
        const double y = grid.y(j);
        for (std::size_t i = 0; i < grid.nx(); ++i) {
            const double x = grid.x(i);
            const std::size_t k = grid.index(i, j);
            const double u = x * c + y * s;   // along the dot major axis
            const double v = -x * s + y * c;  // along the minor axis
            const double r2 = x * x + y * y;
            Region reg = Region::exterior;
            if ((u / a) * (u / a) + (v / b) * (v / b) <= 1.0)
                reg = Region::dot;
            else if (r2 <= r_shell2)
                reg = Region::shell;
            else if (r2 <= r_diel2)
                reg = Region::dielectric;
            map.region[k] = reg;

            switch (reg) {
                case Region::dot:
                    map.permittivity[k] = dot.rel_permittivity;
                    map.mass_e[k] = dot.eff_mass_e;
                    map.mass_hh[k] = dot.eff_mass_hh;
                    map.cb_edge_eV[k] = 0.0;
                    map.vb_edge_eV[k] = 0.0;
                    break;
                case Region::shell:
                    map.permittivity[k] = shell.rel_permittivity;
                    map.mass_e[k] = shell.eff_mass_e;
                    map.mass_hh[k] = shell.eff_mass_hh;
                    map.cb_edge_eV[k] = shell.cb_offset_eV;
                    map.vb_edge_eV[k] = shell.vb_offset_eV;
                    break;
                case Region::dielectric:
                case Region::exterior:
                    map.permittivity[k] = reg == Region::dielectric ? spec.dielectric_permittivity
                                                                    : spec.exterior_permittivity;
                    map.mass_e[k] = 1.0;
                    map.mass_hh[k] = 1.0;
                    map.cb_edge_eV[k] = spec.outer_barrier_eV;
                    map.vb_edge_eV[k] = spec.outer_barrier_eV;
                    break;
            }
        }
    }
    return map;
}

GateCells gate_boundary_cells(const DeviceSpec& spec, const Grid2D& grid) {
    spec.validate();
    require_grid_covers_device(spec, grid);

    const double radius = spec.dielectric_radius_nm();
    const double half_angle = 0.5 * spec.gate_arc_width_nm / radius;
    const double cos_half = std::cos(std::min(half_angle, constants::pi));
    const double r2 = radius * radius;

    auto inside = [&](std::size_t i, std::size_t j) {
        const double x = grid.x(i) - grid.center_x();
        const double y = grid.y(j) - grid.center_y();
        return x * x + y * y <= r2;
    };

    // Gate directions in Gate order: +y, -y, -x, +x.
    constexpr double ux[4] = {0.0, 0.0, -1.0, 1.0};
    constexpr double uy[4] = {1.0, -1.0, 0.0, 0.0};

    GateCells cells;
    const std::size_t nx = grid.nx();
    const std::size_t ny = grid.ny();
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            if (!inside(i, j)) continue;
            const bool outer = i == 0 || j == 0 || i + 1 == nx || j + 1 == ny ||
                               !inside(i - 1, j) || !inside(i + 1, j) || !inside(i, j - 1) ||
                               !inside(i, j + 1);
            if (!outer) continue;
            const double x = grid.x(i) - grid.center_x();
            const double y = grid.y(j) - grid.center_y();
            const double r = std::hypot(x, y);
            int best = -1;
            double best_dot = -std::numeric_limits<double>::infinity();
            for (int g = 0; g < 4; ++g) {
                const double d = x * ux[g] + y * uy[g];
                if (d > best_dot) {
                    best_dot = d;
                    best = g;
                }
            }
            if (best_dot >= cos_half * r * (1.0 - 1e-12)) cells[best].push_back(grid.index(i, j));
        }
    }

    for (Gate g : all_gates) {
        const auto& set = cells[static_cast<std::size_t>(g)];
        if (set.size() < 3) {
            std::ostringstream msg;
            msg << "grid too coarse to resolve the " << to_string(g) << " gate (" << set.size()
                << " cells on its arc, need >= 3)";
            throw GeometryError(msg.str());
        }
    }
    return cells;
}

}  // namespace qdfss
