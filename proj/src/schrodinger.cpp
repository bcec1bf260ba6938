#include "qdfss/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "qdfss/constants.hpp"
#include "qdfss/errors.hpp"

namespace qdfss {

std::string_view to_string(Carrier c) {
    return c == Carrier::electron ? "electron" : "heavy_hole";
}

Hamiltonian::Hamiltonian(Grid2D grid, std::vector<double> diag, std::vector<double> west,
                         std::vector<double> south, std::vector<double> potential)
    : grid_(grid),
      diag_(std::move(diag)),
      west_(std::move(west)),
      south_(std::move(south)),
      potential_(std::move(potential)) {}

void Hamiltonian::apply(std::span<const double> in, std::span<double> out) const {
    const std::size_t n = diag_.size();
    const std::size_t nx = grid_.nx();
    for (std::size_t k = 0; k < n; ++k) {
        double v = diag_[k] * in[k];
        if (k >= 1) v += west_[k] * in[k - 1];
        if (k + 1 < n) v += west_[k + 1] * in[k + 1];
        if (k >= nx) v += south_[k] * in[k - nx];
        if (k + nx < n) v += south_[k + nx] * in[k + nx];
        out[k] = v;
    }
}

Hamiltonian build_hamiltonian(const Grid2D& grid, std::span<const double> mass,
                              std::span<const double> potential_energy_eV) {
    const std::size_t n = grid.size();
    const std::size_t nx = grid.nx();
    const std::size_t ny = grid.ny();
    if (mass.size() != n || potential_energy_eV.size() != n)
        throw std::invalid_argument("build_hamiltonian: inputs do not match the grid");
    for (std::size_t k = 0; k < n; ++k) {
        if (!(mass[k] > 0.0) || !std::isfinite(mass[k])) {
            std::ostringstream msg;
            msg << "build_hamiltonian: non-positive effective mass " << mass[k] << " in cell " << k;
            throw std::invalid_argument(msg.str());
        }
        if (!std::isfinite(potential_energy_eV[k]))
            throw std::invalid_argument("build_hamiltonian: non-finite potential energy");
    }

    const double t0 = constants::hbar2_over_2m0 / grid.cell_area();
    std::vector<double> diag(potential_energy_eV.begin(), potential_energy_eV.end());
    std::vector<double> west(n, 0.0);
    std::vector<double> south(n, 0.0);
    auto coupling = [&](std::size_t p, std::size_t q) {
        return t0 * 0.5 * (1.0 / mass[p] + 1.0 / mass[q]);
    };
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t k = grid.index(i, j);
            // Dirichlet-zero ghost outside the box carries the cell's own mass.
            const double self = t0 / mass[k];
            if (i > 0) {
                const double c = coupling(k - 1, k);
                diag[k] += c;
                west[k] = -c;
            } else {
                diag[k] += self;
            }
            if (i + 1 < nx) diag[k] += coupling(k, k + 1);
            else diag[k] += self;
            if (j > 0) {
                const double c = coupling(k - nx, k);
                diag[k] += c;
                south[k] = -c;
            } else {
                diag[k] += self;
            }
            if (j + 1 < ny) diag[k] += coupling(k, k + nx);
            else diag[k] += self;
        }
    }
    return Hamiltonian(grid, std::move(diag), std::move(west), std::move(south),
                       std::vector<double>(potential_energy_eV.begin(), potential_energy_eV.end()));
}

Hamiltonian build_hamiltonian(const MaterialMap& map, const ScalarField2D& potential,
                              CarrierKind kind) {
    require_same_grid(map.grid, potential.grid(), "build_hamiltonian");
    const auto edge = kind.band_edge(map);
    std::vector<double> v(edge.size());
    // Potential energy of a charge q in phi is q*phi; the hole landscape is
    // written with the valence profile inverted, so both carry +/-phi the same way.
    const double q = static_cast<double>(kind.charge_sign());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = edge[k] + q * potential[k];
    return build_hamiltonian(map.grid, kind.masses(map), v);
}

ScalarField2D gaussian_guess(const Grid2D& grid, double x0, double y0, double width) {
    ScalarField2D f(grid, FieldKind::wavefunction);
    const double inv = 1.0 / (2.0 * width * width);
    for (std::size_t j = 0; j < grid.ny(); ++j)
        for (std::size_t i = 0; i < grid.nx(); ++i) {
            const double dx = grid.x(i) - x0;
            const double dy = grid.y(j) - y0;
            f(i, j) = std::exp(-(dx * dx + dy * dy) * inv);
        }
    f.normalize();
    return f;
}

namespace {

using Vec = Eigen::VectorXd;

double residual_norm(const Hamiltonian& h, const Vec& y, double& energy) {
    Vec hy(y.size());
    h.apply(std::span<const double>(y.data(), y.size()), std::span<double>(hy.data(), hy.size()));
    const double yy = y.squaredNorm();
    energy = y.dot(hy) / yy;
    return (hy - energy * y).norm() / std::sqrt(yy);
}

}  // namespace

EigenResult ground_state(const Hamiltonian& h, const ScalarField2D* initial_guess,
                         const EigenOptions& options) {
    const Grid2D& grid = h.grid();
    const std::size_t n = h.size();
    if (n == 0) throw std::invalid_argument("ground_state: empty operator");

    ScalarField2D guess =
        initial_guess ? *initial_guess
                      : gaussian_guess(grid, grid.center_x(), grid.center_y(),
                                       std::min(grid.extent_x(), grid.extent_y()) / 8.0);
    require_same_grid(guess.grid(), grid, "ground_state");

    // Shift strictly below min V: the kinetic part is positive definite under
    // Dirichlet conditions, so H - s is too.
    const auto pot = h.potential();
    const double vmin = *std::min_element(pot.begin(), pot.end());
    const double shift = vmin - 1e-3;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(3 * n);
    const std::size_t nx = grid.nx();
    for (std::size_t k = 0; k < n; ++k) {
        const auto ik = static_cast<Eigen::Index>(k);
        trip.emplace_back(ik, ik, h.diag(k) - shift);
        if (k >= 1 && h.west(k) != 0.0) trip.emplace_back(ik, ik - 1, h.west(k));
        if (k >= nx && h.south(k) != 0.0)
            trip.emplace_back(ik, ik - static_cast<Eigen::Index>(nx), h.south(k));
    }
    Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    a.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt;
    ldlt.compute(a);
    if (ldlt.info() != Eigen::Success)
        throw SolverError("ground_state: factorisation of the shifted Hamiltonian failed", 0.0);

    const std::size_t m = std::max<std::size_t>(options.krylov_dimension, 2);
    Vec start = Eigen::Map<const Vec>(guess.values().data(), static_cast<Eigen::Index>(n));
    if (start.norm() == 0.0) start.setOnes();

    EigenResult result;
    Eigen::MatrixXd basis(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m + 1));
    Vec y = start;
    double energy = 0.0;
    double res = residual_norm(h, y, energy);
    for (std::size_t restart = 0; restart <= options.max_restarts; ++restart) {
        if (res <= options.residual_tolerance) break;
        if (restart == options.max_restarts) {
            std::ostringstream msg;
            msg << "ground_state did not converge after " << result.iterations
                << " Lanczos steps (residual " << res << " eV)";
            throw SolverError(msg.str(), res, result.residual_history);
        }

        basis.col(0) = y / y.norm();
        std::vector<double> alpha;
        std::vector<double> beta;
        std::size_t steps = 0;
        Vec ritz = y;
        double ritz_energy = energy;
        double ritz_res = res;
        for (std::size_t j = 0; j < m; ++j) {
            Vec w = ldlt.solve(basis.col(static_cast<Eigen::Index>(j)));
            const double aj = basis.col(static_cast<Eigen::Index>(j)).dot(w);
            alpha.push_back(aj);
            // Full reorthogonalisation, applied twice.
            for (int pass = 0; pass < 2; ++pass) {
                const auto cols = basis.leftCols(static_cast<Eigen::Index>(j + 1));
                w -= cols * (cols.transpose() * w);
            }
            ++steps;
            const double bj = w.norm();

            // Ritz pair of the current tridiagonal; the largest eigenvalue of
            // the inverse is the lowest of H.
            const auto k = static_cast<Eigen::Index>(steps);
            Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
            for (Eigen::Index i = 0; i < k; ++i) {
                t(i, i) = alpha[static_cast<std::size_t>(i)];
                if (i + 1 < k) {
                    t(i, i + 1) = beta[static_cast<std::size_t>(i)];
                    t(i + 1, i) = beta[static_cast<std::size_t>(i)];
                }
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t);
            ritz = basis.leftCols(k) * eig.eigenvectors().col(k - 1);
            ritz_res = residual_norm(h, ritz, ritz_energy);
            if (ritz_res <= options.residual_tolerance) break;

            if (j + 1 == m || bj <= 1e-14 * std::abs(aj)) break;
            beta.push_back(bj);
            basis.col(static_cast<Eigen::Index>(j + 1)) = w / bj;
        }
        result.iterations += steps;
        y = ritz;
        energy = ritz_energy;
        res = ritz_res;
        result.residual_history.push_back(res);
    }

    // Normalise to sum psi^2 h^2 = 1 with a non-negative total.
    if (y.sum() < 0.0) y = -y;
    y /= std::sqrt(y.squaredNorm() * grid.cell_area());
    result.energy_eV = energy;
    result.residual = res;
    result.wavefunction =
        ScalarField2D(grid, FieldKind::wavefunction, std::vector<double>(y.data(), y.data() + n));

    double peak = 0.0;
    double edge = 0.0;
    for (std::size_t j = 0; j < grid.ny(); ++j)
        for (std::size_t i = 0; i < grid.nx(); ++i) {
            const double v = std::abs(result.wavefunction(i, j));
            peak = std::max(peak, v);
            if (i == 0 || j == 0 || i + 1 == grid.nx() || j + 1 == grid.ny()) edge = std::max(edge, v);
        }
    result.edge_amplitude_ratio = peak > 0.0 ? edge / peak : 0.0;
    return result;
}

}  // namespace qdfss
