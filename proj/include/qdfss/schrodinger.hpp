#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "qdfss/device.hpp"
#include "qdfss/field.hpp"

namespace qdfss {

enum class Carrier { electron, heavy_hole };

/// Carrier species in the single-band envelope picture.
///
/// Sign convention: both species are treated as positive-mass particles
/// sitting in a well. The electron sees  cb_edge - phi  (eV, phi in V) and the
/// heavy hole sees  vb_edge + phi,  i.e. the inverted valence profile, so the
/// dot is an energy minimum for both.
struct CarrierKind {
    Carrier tag = Carrier::electron;

    static constexpr CarrierKind electron() noexcept { return {Carrier::electron}; }
    static constexpr CarrierKind heavy_hole() noexcept { return {Carrier::heavy_hole}; }

    /// -1 for electrons, +1 for holes.
    int charge_sign() const noexcept { return tag == Carrier::electron ? -1 : 1; }
    std::span<const double> masses(const MaterialMap& map) const noexcept {
        return tag == Carrier::electron ? std::span<const double>(map.mass_e)
                                        : std::span<const double>(map.mass_hh);
    }
    std::span<const double> band_edge(const MaterialMap& map) const noexcept {
        return tag == Carrier::electron ? std::span<const double>(map.cb_edge_eV)
                                        : std::span<const double>(map.vb_edge_eV);
    }
};

std::string_view to_string(Carrier c);

/// Discrete H = -(hbar^2/2) div (1/m grad) + V on a 5-point stencil with
/// Dirichlet-zero values just outside the grid. Energies in eV.
///
/// Face coupling between cells p and q is hbar^2/(2 m0 h^2) * (1/m_p + 1/m_q)/2,
/// i.e. the harmonic mean of the two masses, so the flux through a face is the
/// same seen from either side.
class Hamiltonian {
public:
    Hamiltonian() = default;
    Hamiltonian(Grid2D grid, std::vector<double> diag, std::vector<double> west,
                std::vector<double> south, std::vector<double> potential);

    const Grid2D& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return diag_.size(); }

    /// out = H in.
    void apply(std::span<const double> in, std::span<double> out) const;

    /// Coupling (a negative number) between cell k and k-1; zero at the left edge.
    double west(std::size_t k) const noexcept { return west_[k]; }
    /// Coupling between cell k and k-nx; zero at the bottom edge.
    double south(std::size_t k) const noexcept { return south_[k]; }
    double diag(std::size_t k) const noexcept { return diag_[k]; }
    std::span<const double> potential() const noexcept { return potential_; }

private:
    Grid2D grid_;
    std::vector<double> diag_;
    std::vector<double> west_;
    std::vector<double> south_;
    std::vector<double> potential_;
};

/// Builds H from per-cell masses (units of m0) and potential energies (eV).
/// Throws std::invalid_argument for a non-positive mass.
Hamiltonian build_hamiltonian(const Grid2D& grid, std::span<const double> mass,
                              std::span<const double> potential_energy_eV);

/// Builds H for one carrier from a material map and an electrostatic potential
/// (V) sampled on the same grid.
Hamiltonian build_hamiltonian(const MaterialMap& map, const ScalarField2D& potential,
                              CarrierKind kind);

struct EigenOptions {
    /// ||H psi - E psi|| / ||psi|| in eV.
    double residual_tolerance = 1e-8;
    std::size_t krylov_dimension = 20;
    std::size_t max_restarts = 40;

    bool operator==(const EigenOptions&) const = default;
};

struct EigenResult {
    double energy_eV = 0.0;
    ScalarField2D wavefunction;  ///< normalised, sum psi^2 h^2 = 1, non-negative sum
    std::size_t iterations = 0;  ///< Lanczos steps taken
    double residual = 0.0;
    std::vector<double> residual_history;  ///< one entry per restart
    double edge_amplitude_ratio = 0.0;     ///< max |psi| on the grid edge / max |psi|
};

/// Normalised Gaussian exp(-r^2/(2 w^2)) centred at (x0, y0).
ScalarField2D gaussian_guess(const Grid2D& grid, double x0, double y0, double width);

/// Lowest eigenpair by restarted Lanczos on the shifted inverse (H - s)^-1,
/// with s strictly below the potential minimum so the shifted operator is
/// positive definite. Deterministic for a given initial guess; without one a
/// Gaussian of width min(extent)/8 at the grid centre is used. Throws
/// SolverError, carrying the residual history, if the restart cap is reached.
EigenResult ground_state(const Hamiltonian& h, const ScalarField2D* initial_guess = nullptr,
                         const EigenOptions& options = {});

}  // namespace qdfss
