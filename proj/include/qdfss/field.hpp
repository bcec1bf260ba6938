#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qdfss {

/// Uniform Cartesian cell-centred grid with square cells.
///
/// Cell (i, j) has its centre at
///   x = center_x + (i + 0.5 - nx/2) * spacing,
///   y = center_y + (j + 0.5 - ny/2) * spacing.
/// Offsets are half-integers, so centred grids are exactly mirror-symmetric in
/// floating point, which the symmetry tests rely on.
class Grid2D {
public:
    Grid2D() = default;

    /// Throws std::invalid_argument unless extent_x/nx == extent_y/ny.
    Grid2D(std::size_t nx, std::size_t ny, double extent_x, double extent_y,
           double center_x = 0.0, double center_y = 0.0);

    /// Square-cell grid from a spacing directly.
    static Grid2D from_spacing(std::size_t nx, std::size_t ny, double spacing,
                               double center_x = 0.0, double center_y = 0.0);

    std::size_t nx() const noexcept { return nx_; }
    std::size_t ny() const noexcept { return ny_; }
    std::size_t size() const noexcept { return nx_ * ny_; }
    double spacing() const noexcept { return h_; }
    double extent_x() const noexcept { return static_cast<double>(nx_) * h_; }
    double extent_y() const noexcept { return static_cast<double>(ny_) * h_; }
    double center_x() const noexcept { return cx_; }
    double center_y() const noexcept { return cy_; }
    double cell_area() const noexcept { return h_ * h_; }

    std::size_t index(std::size_t i, std::size_t j) const noexcept { return j * nx_ + i; }
    double x(std::size_t i) const noexcept {
        return cx_ + (static_cast<double>(i) + 0.5 - 0.5 * static_cast<double>(nx_)) * h_;
    }
    double y(std::size_t j) const noexcept {
        return cy_ + (static_cast<double>(j) + 0.5 - 0.5 * static_cast<double>(ny_)) * h_;
    }

    bool operator==(const Grid2D&) const = default;

private:
    std::size_t nx_ = 0;
    std::size_t ny_ = 0;
    double h_ = 0.0;
    double cx_ = 0.0;
    double cy_ = 0.0;
};

enum class FieldKind { potential, wavefunction, density };

std::string_view to_string(FieldKind kind);

/// Real-valued function sampled at the cell centres of a Grid2D.
///
/// Units by kind: potential in V, wavefunction amplitude in nm^-1,
/// density in nm^-2.
class ScalarField2D {
public:
    ScalarField2D() = default;
    ScalarField2D(Grid2D grid, FieldKind kind, double fill = 0.0);
    ScalarField2D(Grid2D grid, FieldKind kind, std::vector<double> values);

    const Grid2D& grid() const noexcept { return grid_; }
    FieldKind kind() const noexcept { return kind_; }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return values_[grid_.index(i, j)]; }
    double operator()(std::size_t i, std::size_t j) const noexcept {
        return values_[grid_.index(i, j)];
    }
    double& operator[](std::size_t k) noexcept { return values_[k]; }
    double operator[](std::size_t k) const noexcept { return values_[k]; }

    bool all_finite() const noexcept;

    /// Sum |f|^2 h^2.
    double norm_squared() const noexcept;

    /// Scales so that norm_squared() == 1. Throws if the field is identically zero.
    void normalize();

    /// Bilinear sample at an arbitrary point; clamps to the outermost cell centres.
    double sample(double x, double y) const noexcept;

    /// Returns this field resampled onto another grid (bilinear).
    ScalarField2D resampled(const Grid2D& target) const;

private:
    Grid2D grid_;
    FieldKind kind_ = FieldKind::potential;
    std::vector<double> values_;
};

/// Throws std::invalid_argument if the two fields are not on the same grid.
void require_same_grid(const Grid2D& a, const Grid2D& b, std::string_view what);

/// Writes "x_nm,y_nm,<value_column>" rows (LF line endings, header first).
/// Wavefunction fields are written as |psi|^2 when `square` is set.
void write_field_csv(std::ostream& out, const ScalarField2D& field, std::string_view value_column,
                     bool square = false);

}  // namespace qdfss
