#pragma once

#include <cstddef>
#include <memory>
#include <optional>

#include "qdfss/device.hpp"
#include "qdfss/field.hpp"
#include "qdfss/poisson.hpp"
#include "qdfss/schrodinger.hpp"

namespace qdfss {

/// First and second moments of a non-negative weight, read as a 2D Gaussian.
struct GaussianMoments {
    double centroid_x_nm = 0.0;
    double centroid_y_nm = 0.0;
    double sigma_major_nm = 0.0;
    double sigma_minor_nm = 0.0;
    double angle_deg = 0.0;  ///< major axis from +x, in (-90, 90]
    double sigma_x_nm = 0.0;  ///< gate frame
    double sigma_y_nm = 0.0;
    double elongation = 1.0;  ///< sigma_x / sigma_y, gate frame
    double cov_xx = 0.0;
    double cov_yy = 0.0;
    double cov_xy = 0.0;
};

enum class WeightMode {
    density,    ///< field values are the weight (must be non-negative)
    amplitude,  ///< weight is the squared field value
};

/// Throws std::invalid_argument for negative weights in density mode, a zero
/// total weight, or a degenerate covariance.
GaussianMoments moments_fit(const ScalarField2D& field, WeightMode mode);

/// beta = |sum psi_h psi_e h^2|^2 for normalised fields on the same grid.
double overlap_beta(const ScalarField2D& psi_e, const ScalarField2D& psi_h);

/// Extent of the product wavefunction psi_h * psi_e.
struct HybridLengths {
    double l_x_nm = 0.0;
    double l_y_nm = 0.0;
    double xi = 1.0;  ///< l_y / l_x
    GaussianMoments moments;
};

/// Fits |psi_h psi_e|^2 and converts the density sigmas to amplitude lengths
/// with l = sqrt(2) sigma (amplitude exp(-x^2/(2 l^2)) has density variance l^2/2).
///
/// l_x and l_y are taken along the principal axes of the product. l_x is the
/// principal axis closer to `reference_axis_deg` (the dot major axis), so
/// xi > 1 means the product is stretched across the dot axis and the sign of
/// delta tracks which way the anisotropy points.
HybridLengths hybridized_lengths(const ScalarField2D& psi_e, const ScalarField2D& psi_h,
                                 double reference_axis_deg = 0.0);

/// Prefactor of the long-range exchange splitting in ueV nm^3:
///   K = 3 sqrt(pi) e^2 hbar^2 Ep / ((4 pi eps0) 16 sqrt(2) eps m0 Eg^2).
double exchange_constant_ueV_nm3(const MaterialParams& materials);

struct FssValue {
    double delta_ueV = 0.0;
    double fss_ueV = 0.0;  ///< 2 |delta|
};

/// delta = K beta xi (1 - xi) / l_y^3 with the z-confinement factor at one.
FssValue compute_fss(const MaterialParams& materials, double beta, double xi, double l_y_nm);

/// Everything computed for one gate configuration.
struct ExcitonReport {
    GateVoltages gates;
    double delta_ueV = 0.0;
    double fss_ueV = 0.0;
    double beta = 0.0;
    double xi = 1.0;
    double l_x_eh_nm = 0.0;
    double l_y_eh_nm = 0.0;
    double eps_e = 1.0;
    double eps_h = 1.0;
    double hybrid_angle_deg = 0.0;
    double electron_energy_eV = 0.0;
    double hole_energy_eV = 0.0;
    double electron_residual_eV = 0.0;
    double hole_residual_eV = 0.0;
    std::size_t hartree_iterations = 0;

    bool operator==(const ExcitonReport&) const = default;
};

/// Grid and solver settings for the full pipeline.
struct SimulationOptions {
    /// Cells per side of the square Poisson grid.
    std::size_t grid_cells = 512;
    /// Distance from the dielectric circle to the box edge; at least one gate width.
    double margin_nm = 200.0;
    /// The carrier problems are solved on a finer centred window.
    double window_half_width_nm = 40.0;
    double window_spacing_nm = 0.25;
    PoissonOptions poisson;
    EigenOptions eigen;
    /// Edge amplitude above this fraction of the peak means the window is too small.
    double max_edge_amplitude_ratio = 1e-6;

    bool hartree = false;
    double hartree_mixing = 0.5;
    double hartree_tolerance_V = 1e-6;
    std::size_t hartree_max_iterations = 200;

    bool operator==(const SimulationOptions&) const = default;
};

/// Full solution for one configuration, fields included.
struct Evaluation {
    ExcitonReport report;
    ScalarField2D potential;         ///< device grid
    ScalarField2D window_potential;  ///< carrier window
    EigenResult electron;
    EigenResult hole;
};

/// Device model with its Poisson machinery prepared once. Charge-free
/// potentials come from the cached unit-gate responses; Hartree mode solves
/// the full Poisson problem every iteration. Thread-safe for concurrent evaluate().
class DeviceSimulator {
public:
    DeviceSimulator(const DeviceSpec& spec, const Grid2D& grid, SimulationOptions options = {});
    DeviceSimulator(const DeviceSpec& spec, SimulationOptions options = {});

    Evaluation solve(const GateVoltages& gates) const;
    ExcitonReport evaluate(const GateVoltages& gates) const { return solve(gates).report; }

    ScalarField2D potential(const GateVoltages& gates) const;

    const DeviceSpec& spec() const noexcept { return spec_; }
    const Grid2D& grid() const noexcept { return grid_; }
    const Grid2D& window() const noexcept { return window_; }
    const MaterialMap& device_map() const noexcept { return device_map_; }
    const MaterialMap& window_map() const noexcept { return window_map_; }
    const GateCells& gate_cells() const noexcept { return gate_cells_; }
    const SimulationOptions& options() const noexcept { return options_; }

private:
    Evaluation carriers(const GateVoltages& gates, ScalarField2D potential) const;

    DeviceSpec spec_;
    Grid2D grid_;
    SimulationOptions options_;
    MaterialMap device_map_;
    GateCells gate_cells_;
    Grid2D window_;
    MaterialMap window_map_;
    std::unique_ptr<GateResponse> response_;
};

/// One-shot pipeline: material map, Poisson, both carriers, overlap, lengths, FSS.
ExcitonReport evaluate_configuration(const DeviceSpec& spec, const Grid2D& grid,
                                     const GateVoltages& gates,
                                     const SimulationOptions& options = {});

}  // namespace qdfss
