#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include "qdfss/device.hpp"
#include "qdfss/field.hpp"

namespace qdfss {

/// Potentials applied to the four contacts, in volts.
struct GateVoltages {
    double top = 0.0;
    double bottom = 0.0;
    double left = 0.0;
    double right = 0.0;

    /// Quadrupole potential V: left/right at +V, top/bottom at -V. V = -0.5 is
    /// the configuration with top/bottom positive and left/right negative.
    static GateVoltages quadrupole(double v) noexcept { return {-v, -v, v, v}; }
    /// Lateral potential: left gate at +v, the rest grounded.
    static GateVoltages lateral(double v) noexcept { return {0.0, 0.0, v, 0.0}; }

    double operator[](Gate g) const noexcept;
    bool all_finite() const noexcept;
    bool operator==(const GateVoltages&) const = default;
};

enum class Preconditioner { jacobi, incomplete_cholesky };

struct PoissonOptions {
    double rel_tolerance = 1e-8;
    /// 0 selects the default cap of 50 * max(nx, ny).
    std::size_t max_iterations = 0;
    Preconditioner preconditioner = Preconditioner::incomplete_cholesky;
    /// Thickness over which an areal carrier density is spread to form a volume charge.
    double sheet_thickness_nm = 3.0;

    bool operator==(const PoissonOptions&) const = default;
};

struct PoissonStats {
    std::size_t iterations = 0;
    double rel_residual = 0.0;
};

/// Solves -div(eps grad phi) = source on `grid` with a 5-point finite-volume
/// stencil. Face permittivities are harmonic means of the adjacent cells.
/// Cells with pinned[k] != 0 are held at pinned_values[k]; the outer box edge
/// carries zero normal flux. `source` is rho/eps0 in V/nm^2 (empty means zero).
///
/// Converges when ||b - A phi|| <= rel_tolerance * ||b||, with b including the
/// pinned-cell boundary terms. Throws SolverError on hitting the iteration cap.
ScalarField2D solve_poisson_system(const Grid2D& grid, std::span<const double> permittivity,
                                   std::span<const std::uint8_t> pinned,
                                   std::span<const double> pinned_values,
                                   std::span<const double> source, const PoissonOptions& options,
                                   PoissonStats* stats = nullptr);

/// Device-level solve. `carrier_density`, when given, is the net positive
/// carrier density (holes minus electrons) per unit in-plane area, in nm^-2,
/// on the same grid as `map`.
ScalarField2D solve_poisson(const MaterialMap& map, const GateCells& gates,
                            const GateVoltages& voltages,
                            const ScalarField2D* carrier_density = nullptr,
                            const PoissonOptions& options = {}, PoissonStats* stats = nullptr);

/// Unit-voltage responses of each gate for a charge-free device. Any
/// charge-free potential is the voltage-weighted sum of the four responses.
class GateResponse {
public:
    GateResponse(const MaterialMap& map, const GateCells& gates, const PoissonOptions& options = {});

    ScalarField2D potential(const GateVoltages& voltages) const;
    const ScalarField2D& unit_response(Gate g) const noexcept {
        return unit_[static_cast<std::size_t>(g)];
    }

private:
    std::array<ScalarField2D, 4> unit_;
};

struct FieldMagnitudeStats {
    double max_V_per_nm = 0.0;
    double mean_V_per_nm = 0.0;
    std::size_t cells = 0;
};

/// |grad phi| statistics over the cells of one region (central differences,
/// one-sided at the grid edge).
FieldMagnitudeStats field_magnitude_stats(const ScalarField2D& potential, const MaterialMap& map,
                                          Region region);

/// Field statistics over the dot cells.
inline FieldMagnitudeStats interior_field_magnitude(const ScalarField2D& potential,
                                                    const MaterialMap& map) {
    return field_magnitude_stats(potential, map, Region::dot);
}

}  // namespace qdfss
