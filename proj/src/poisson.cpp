#include "qdfss/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "qdfss/constants.hpp"
#include "qdfss/errors.hpp"

namespace qdfss {

double GateVoltages::operator[](Gate g) const noexcept {
    switch (g) {
        case Gate::top: return top;
        case Gate::bottom: return bottom;
        case Gate::left: return left;
        case Gate::right: return right;
    }
    return 0.0;
}

bool GateVoltages::all_finite() const noexcept {
    return std::isfinite(top) && std::isfinite(bottom) && std::isfinite(left) &&
           std::isfinite(right);
}

namespace {

double harmonic_mean(double a, double b) { return 2.0 * a * b / (a + b); }

// Symmetric 5-point operator on free cells. west[k] couples k with k-1,
// south[k] couples k with k-nx; both are zero across the box edge and
// wherever either side is pinned. Pinned rows are the identity.
struct Stencil {
    std::size_t nx = 0;
    std::size_t n = 0;
    std::vector<double> diag;
    std::vector<double> west;
    std::vector<double> south;

    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        for (std::size_t k = 0; k < n; ++k) {
            double v = diag[k] * x[k];
            if (k >= 1) v += west[k] * x[k - 1];
            if (k + 1 < n) v += west[k + 1] * x[k + 1];
            if (k >= nx) v += south[k] * x[k - nx];
            if (k + nx < n) v += south[k + nx] * x[k + nx];
            y[k] = v;
        }
    }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

class Preconditioner_ {
public:
    Preconditioner_(const Stencil& a, Preconditioner kind) : a_(a), kind_(kind), d_(a.n) {
        if (kind_ == Preconditioner::jacobi) {
            d_ = a.diag;
            return;
        }
        // IC(0): d_k = a_kk - w_k^2/d_{k-1} - s_k^2/d_{k-nx}.
        for (std::size_t k = 0; k < a.n; ++k) {
            double v = a.diag[k];
            if (k >= 1) v -= a.west[k] * a.west[k] / d_[k - 1];
            if (k >= a.nx) v -= a.south[k] * a.south[k] / d_[k - a.nx];
            d_[k] = v > 0.0 ? v : a.diag[k];
        }
    }

    void apply(const std::vector<double>& r, std::vector<double>& z) const {
        const std::size_t n = a_.n;
        const std::size_t nx = a_.nx;
        if (kind_ == Preconditioner::jacobi) {
            for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / d_[k];
            return;
        }
        // (D+L) u = r, then (D+L^T) z = D u.
        for (std::size_t k = 0; k < n; ++k) {
            double v = r[k];
            if (k >= 1) v -= a_.west[k] * z[k - 1];
            if (k >= nx) v -= a_.south[k] * z[k - nx];
            z[k] = v / d_[k];
        }
        for (std::size_t k = n; k-- > 0;) {
            double v = d_[k] * z[k];
            if (k + 1 < n) v -= a_.west[k + 1] * z[k + 1];
            if (k + nx < n) v -= a_.south[k + nx] * z[k + nx];
            z[k] = v / d_[k];
        }
    }

private:
    const Stencil& a_;
    Preconditioner kind_;
    std::vector<double> d_;
};

}  // namespace

ScalarField2D solve_poisson_system(const Grid2D& grid, std::span<const double> permittivity,
                                   std::span<const std::uint8_t> pinned,
                                   std::span<const double> pinned_values,
                                   std::span<const double> source, const PoissonOptions& options,
                                   PoissonStats* stats) {
    const std::size_t n = grid.size();
    const std::size_t nx = grid.nx();
    const std::size_t ny = grid.ny();
    if (permittivity.size() != n || pinned.size() != n || pinned_values.size() != n)
        throw std::invalid_argument("solve_poisson_system: input sizes do not match the grid");
    if (!source.empty() && source.size() != n)
        throw std::invalid_argument("solve_poisson_system: source is not on the grid");

    Stencil a;
    a.nx = nx;
    a.n = n;
    a.diag.assign(n, 0.0);
    a.west.assign(n, 0.0);
    a.south.assign(n, 0.0);
    std::vector<double> b(n, 0.0);
    const double h2 = grid.cell_area();

    // Accumulate one face between free/pinned cells p and q with coupling c.
    auto face = [&](std::size_t p, std::size_t q, double c, std::vector<double>& offdiag,
                    std::size_t slot) {
        const bool pp = pinned[p] != 0;
        const bool pq = pinned[q] != 0;
        if (!pp) a.diag[p] += c;
        if (!pq) a.diag[q] += c;
        if (!pp && !pq) {
            offdiag[slot] = -c;
        } else if (!pp) {
            b[p] += c * pinned_values[q];
        } else if (!pq) {
            b[q] += c * pinned_values[p];
        }
    };

    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t k = grid.index(i, j);
            if (i > 0) face(k - 1, k, harmonic_mean(permittivity[k - 1], permittivity[k]), a.west, k);
            if (j > 0)
                face(k - nx, k, harmonic_mean(permittivity[k - nx], permittivity[k]), a.south, k);
        }
    }

    std::vector<double> x(n, 0.0);
    bool any_pinned = false;
    for (std::size_t k = 0; k < n; ++k) {
        if (pinned[k]) {
            any_pinned = true;
            a.diag[k] = 1.0;
            b[k] = pinned_values[k];
            x[k] = pinned_values[k];
        } else if (!source.empty()) {
            b[k] += source[k] * h2;
        }
    }
    if (!any_pinned)
        throw std::invalid_argument("solve_poisson_system: at least one pinned cell is required");

    const std::size_t cap =
        options.max_iterations ? options.max_iterations : 50 * std::max(nx, ny);
    const double bnorm = std::sqrt(dot(b, b));
    PoissonStats local;
    if (bnorm == 0.0) {
        if (stats) *stats = local;
        return ScalarField2D(grid, FieldKind::potential, std::move(x));
    }

    // Preconditioned conjugate gradients, restarted from the current iterate
    // if the recursively updated residual drifts from the true one.
    Preconditioner_ m(a, options.preconditioner);
    std::vector<double> r(n), z(n), p(n), ap(n);
    std::size_t it = 0;
    double rel = 0.0;
    for (;;) {
        a.apply(x, ap);
        for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - ap[k];
        rel = std::sqrt(dot(r, r)) / bnorm;
        if (rel <= options.rel_tolerance || it >= cap) break;
        m.apply(r, z);
        p = z;
        double rz = dot(r, z);
        while (it < cap) {
            a.apply(p, ap);
            const double alpha = rz / dot(p, ap);
            for (std::size_t k = 0; k < n; ++k) {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            ++it;
            if (std::sqrt(dot(r, r)) / bnorm <= options.rel_tolerance) break;
            m.apply(r, z);
            const double rz_new = dot(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
        }
    }
    local.iterations = it;
    local.rel_residual = rel;
    if (stats) *stats = local;
    if (rel > options.rel_tolerance) {
        std::ostringstream msg;
        msg << "Poisson solve did not converge after " << it << " iterations (relative residual "
            << rel << ")";
        throw SolverError(msg.str(), rel);
    }
    return ScalarField2D(grid, FieldKind::potential, std::move(x));
}

ScalarField2D solve_poisson(const MaterialMap& map, const GateCells& gates,
                            const GateVoltages& voltages, const ScalarField2D* carrier_density,
                            const PoissonOptions& options, PoissonStats* stats) {
    if (!voltages.all_finite()) throw std::invalid_argument("gate voltages must be finite");
    const Grid2D& grid = map.grid;
    const std::size_t n = grid.size();
    std::vector<std::uint8_t> pinned(n, 0);
    std::vector<double> values(n, 0.0);
    for (Gate g : all_gates) {
        for (std::size_t k : gates[static_cast<std::size_t>(g)]) {
            if (k >= n) throw std::invalid_argument("gate cell index outside the grid");
            pinned[k] = 1;
            values[k] = voltages[g];
        }
    }
    std::vector<double> source;
    if (carrier_density) {
        require_same_grid(carrier_density->grid(), grid, "solve_poisson");
        if (!(options.sheet_thickness_nm > 0.0))
            throw std::invalid_argument("sheet_thickness_nm must be positive");
        source.resize(n);
        const double scale = constants::e_over_eps0_V_nm / options.sheet_thickness_nm;
        for (std::size_t k = 0; k < n; ++k) source[k] = (*carrier_density)[k] * scale;
    }
    return solve_poisson_system(grid, map.permittivity, pinned, values, source, options, stats);
}

GateResponse::GateResponse(const MaterialMap& map, const GateCells& gates,
                           const PoissonOptions& options) {
    for (Gate g : all_gates) {
        GateVoltages unit;
        switch (g) {
            case Gate::top: unit.top = 1.0; break;
            case Gate::bottom: unit.bottom = 1.0; break;
            case Gate::left: unit.left = 1.0; break;
            case Gate::right: unit.right = 1.0; break;
        }
        unit_[static_cast<std::size_t>(g)] = solve_poisson(map, gates, unit, nullptr, options);
    }
}

ScalarField2D GateResponse::potential(const GateVoltages& voltages) const {
    if (!voltages.all_finite()) throw std::invalid_argument("gate voltages must be finite");
    ScalarField2D out(unit_[0].grid(), FieldKind::potential);
    auto dst = out.values();
    for (Gate g : all_gates) {
        const double v = voltages[g];
        if (v == 0.0) continue;
        auto src = unit_[static_cast<std::size_t>(g)].values();
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += v * src[k];
    }
    return out;
}

FieldMagnitudeStats field_magnitude_stats(const ScalarField2D& potential, const MaterialMap& map,
                                          Region region) {
    require_same_grid(potential.grid(), map.grid, "field_magnitude_stats");
    const Grid2D& g = potential.grid();
    const double h = g.spacing();
    FieldMagnitudeStats out;
    double sum = 0.0;
    auto derivative = [&](std::size_t lo, std::size_t mid, std::size_t hi, std::size_t count,
                          auto at) {
        if (count < 2) return 0.0;
        if (mid == 0) return (at(hi) - at(mid)) / h;
        if (mid + 1 == count) return (at(mid) - at(lo)) / h;
        return (at(hi) - at(lo)) / (2.0 * h);
    };
    for (std::size_t j = 0; j < g.ny(); ++j) {
        for (std::size_t i = 0; i < g.nx(); ++i) {
            if (map.region[g.index(i, j)] != region) continue;
            const double ex = derivative(i == 0 ? 0 : i - 1, i, i + 1, g.nx(),
                                         [&](std::size_t ii) { return potential(ii, j); });
            const double ey = derivative(j == 0 ? 0 : j - 1, j, j + 1, g.ny(),
                                         [&](std::size_t jj) { return potential(i, jj); });
            const double mag = std::hypot(ex, ey);
            out.max_V_per_nm = std::max(out.max_V_per_nm, mag);
            sum += mag;
            ++out.cells;
        }
    }
    if (out.cells) out.mean_V_per_nm = sum / static_cast<double>(out.cells);
    return out;
}

}  // namespace qdfss
