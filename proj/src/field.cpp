#include "qdfss/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace qdfss {

Grid2D::Grid2D(std::size_t nx, std::size_t ny, double extent_x, double extent_y, double center_x,
               double center_y)
    : nx_(nx), ny_(ny), cx_(center_x), cy_(center_y) {
    if (nx == 0 || ny == 0) throw std::invalid_argument("Grid2D: cell counts must be positive");
    if (!(extent_x > 0.0) || !(extent_y > 0.0))
        throw std::invalid_argument("Grid2D: extents must be positive");
    const double hx = extent_x / static_cast<double>(nx);
    const double hy = extent_y / static_cast<double>(ny);
    if (std::abs(hx - hy) > 1e-12 * std::max(hx, hy))
        throw std::invalid_argument("Grid2D: cells must be square (extent_x/nx != extent_y/ny)");
    h_ = hx;
}

Grid2D Grid2D::from_spacing(std::size_t nx, std::size_t ny, double spacing, double center_x,
                            double center_y) {
    return Grid2D(nx, ny, spacing * static_cast<double>(nx), spacing * static_cast<double>(ny),
                  center_x, center_y);
}

std::string_view to_string(FieldKind kind) {
    switch (kind) {
        case FieldKind::potential: return "potential";
        case FieldKind::wavefunction: return "wavefunction";
        case FieldKind::density: return "density";
    }
    return "unknown";
}

ScalarField2D::ScalarField2D(Grid2D grid, FieldKind kind, double fill)
    : grid_(grid), kind_(kind), values_(grid.size(), fill) {}

ScalarField2D::ScalarField2D(Grid2D grid, FieldKind kind, std::vector<double> values)
    : grid_(grid), kind_(kind), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw std::invalid_argument("ScalarField2D: value count does not match grid");
}

bool ScalarField2D::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField2D::norm_squared() const noexcept {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return s * grid_.cell_area();
}

void ScalarField2D::normalize() {
    const double n2 = norm_squared();
    if (!(n2 > 0.0)) throw std::invalid_argument("ScalarField2D::normalize: zero field");
    const double scale = 1.0 / std::sqrt(n2);
    for (double& v : values_) v *= scale;
}

double ScalarField2D::sample(double x, double y) const noexcept {
    const double h = grid_.spacing();
    const auto nx = static_cast<double>(grid_.nx());
    const auto ny = static_cast<double>(grid_.ny());
    // Continuous cell coordinate: cell i has its centre at fi == i.
    double fi = (x - grid_.center_x()) / h - 0.5 + 0.5 * nx;
    double fj = (y - grid_.center_y()) / h - 0.5 + 0.5 * ny;
    fi = std::clamp(fi, 0.0, nx - 1.0);
    fj = std::clamp(fj, 0.0, ny - 1.0);
    const auto i0 = static_cast<std::size_t>(std::min(std::floor(fi), std::max(nx - 2.0, 0.0)));
    const auto j0 = static_cast<std::size_t>(std::min(std::floor(fj), std::max(ny - 2.0, 0.0)));
    const std::size_t i1 = std::min(i0 + 1, grid_.nx() - 1);
    const std::size_t j1 = std::min(j0 + 1, grid_.ny() - 1);
    const double tx = fi - static_cast<double>(i0);
    const double ty = fj - static_cast<double>(j0);
    const double a = (*this)(i0, j0) * (1.0 - tx) + (*this)(i1, j0) * tx;
    const double b = (*this)(i0, j1) * (1.0 - tx) + (*this)(i1, j1) * tx;
    return a * (1.0 - ty) + b * ty;
}

ScalarField2D ScalarField2D::resampled(const Grid2D& target) const {
    ScalarField2D out(target, kind_);
    for (std::size_t j = 0; j < target.ny(); ++j)
        for (std::size_t i = 0; i < target.nx(); ++i) out(i, j) = sample(target.x(i), target.y(j));
    return out;
}

void require_same_grid(const Grid2D& a, const Grid2D& b, std::string_view what) {
    if (!(a == b)) throw std::invalid_argument(std::string(what) + ": fields live on different grids");
}

void write_field_csv(std::ostream& out, const ScalarField2D& field, std::string_view value_column,
                     bool square) {
    const Grid2D& g = field.grid();
    out << "x_nm,y_nm," << value_column << '\n';
    char buf[96];
    for (std::size_t j = 0; j < g.ny(); ++j) {
        for (std::size_t i = 0; i < g.nx(); ++i) {
            double v = field(i, j);
            if (square) v *= v;
            std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g\n", g.x(i), g.y(j), v);
            out << buf;
        }
    }
}

}  // namespace qdfss
