#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "qdfss/field.hpp"

namespace qdfss {

/// Bulk band and dielectric parameters of one semiconductor.
///
/// The band offsets describe the step from the dot material into this
/// material; they are only meaningful on the barrier (shell) material.
struct MaterialParams {
    double bulk_gap_eV = 1.519;
    double kane_energy_eV = 23.0;
    double eff_mass_e = 0.067;   // m0
    double eff_mass_hh = 0.5;    // m0
    double rel_permittivity = 12.5;
    double cb_offset_eV = 0.0;
    double vb_offset_eV = 0.0;

    bool operator==(const MaterialParams&) const = default;

    /// GaAs dot material.
    static MaterialParams gaas();
    /// Al(0.33)Ga(0.67)As barrier, with a 65/35 split of the 0.41 eV gap difference.
    static MaterialParams algaas_shell();

    /// Throws std::invalid_argument naming the offending field.
    void validate(std::string_view label) const;
};

/// Geometry of the gated dot-in-nanowire cross section. Lengths in nm,
/// angles in degrees. The dot is an ellipse whose semi-axes average to
/// dot_radius_mean and whose ratio is dot_elongation (major/minor); the
/// major axis sits at dot_axis_angle_deg from +x.
struct DeviceSpec {
    double dot_radius_mean_nm = 15.0;
    double dot_elongation = 1.07;
    double dot_axis_angle_deg = 0.0;
    double shell_thickness_nm = 110.0;
    double dielectric_thickness_nm = 150.0;
    double gate_arc_width_nm = 200.0;
    MaterialParams materials_dot = MaterialParams::gaas();
    MaterialParams materials_shell = MaterialParams::algaas_shell();
    double dielectric_permittivity = 9.0;  // Al2O3
    double exterior_permittivity = 1.0;
    /// Band-edge step seen by carriers in the oxide and beyond (never reached in practice).
    double outer_barrier_eV = 3.0;

    bool operator==(const DeviceSpec&) const = default;

    double dot_semi_major_nm() const noexcept;
    double dot_semi_minor_nm() const noexcept;
    double shell_radius_nm() const noexcept { return dot_radius_mean_nm + shell_thickness_nm; }
    double dielectric_radius_nm() const noexcept {
        return shell_radius_nm() + dielectric_thickness_nm;
    }

    /// Throws GeometryError for containment violations and std::invalid_argument
    /// for out-of-range scalars.
    void validate() const;
};

/// Square Poisson grid centred on the device whose half-extent is the
/// dielectric radius plus `margin_nm` (at least one gate width).
Grid2D device_grid(const DeviceSpec& spec, std::size_t n, double margin_nm);

/// Throws GeometryError unless `grid` covers the dielectric circle plus one gate width.
void require_grid_covers_device(const DeviceSpec& spec, const Grid2D& grid);

enum class Region : std::uint8_t { dot, shell, dielectric, exterior };

std::string_view to_string(Region region);

/// Per-cell material assignment, by cell centre.
struct MaterialMap {
    Grid2D grid;
    std::vector<Region> region;
    std::vector<double> permittivity;
    std::vector<double> mass_e;
    std::vector<double> mass_hh;
    std::vector<double> cb_edge_eV;  // electron band-edge offset relative to the dot
    std::vector<double> vb_edge_eV;  // hole confinement offset relative to the dot (>= 0)

    std::size_t count(Region r) const noexcept;
    bool operator==(const MaterialMap&) const = default;
};

MaterialMap build_material_map(const DeviceSpec& spec, const Grid2D& grid);

enum class Gate : std::uint8_t { top = 0, bottom = 1, left = 2, right = 3 };
inline constexpr std::array<Gate, 4> all_gates{Gate::top, Gate::bottom, Gate::left, Gate::right};

std::string_view to_string(Gate gate);

/// Cell indices (sorted ascending) pinned to each gate, indexed by Gate.
using GateCells = std::array<std::vector<std::size_t>, 4>;

/// Dielectric cells touching the exterior whose angular position falls within
/// each gate arc. Throws GeometryError if the arcs overlap, if the grid does not
/// cover the device, or if any arc resolves to fewer than 3 cells.
GateCells gate_boundary_cells(const DeviceSpec& spec, const Grid2D& grid);

}  // namespace qdfss
