#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace nlheat {

// Spatial point. Components beyond the grid dimension are zero.
using Point = std::array<double, 3>;

double distance(const Point& a, const Point& b);
double norm(const Point& a);

/**
 * Cell-centered uniform lattice on the cube [-L, L]^n.
 *
 * Cell i along an axis sits at -L + (i + 1/2) h with h = 2L / M, so the
 * coordinate set is symmetric under negation and no two distinct cells
 * share a position. Flat indices are row-major with axis 0 slowest.
 */
class Grid {
public:
    Grid(int dimension, double half_width, std::size_t points_per_axis);

    int dimension() const { return dimension_; }
    double half_width() const { return half_width_; }
    std::size_t points_per_axis() const { return points_; }
    double spacing() const { return spacing_; }

    std::size_t cell_count() const { return cell_count_; }
    double cell_volume() const { return cell_volume_; }

    // Same value as -L + (i + 1/2) h; this form negates exactly under i -> M-1-i.
    double coordinate(std::size_t axis_index) const {
        return (static_cast<double>(axis_index) + 0.5 - 0.5 * static_cast<double>(points_)) * spacing_;
    }

    std::array<std::size_t, 3> multi_index(std::size_t flat) const;
    std::size_t flat_index(const std::array<std::size_t, 3>& idx) const;
    Point center(std::size_t flat) const;

    // Smallest distance from p to the faces of the box (p assumed inside).
    double distance_to_boundary(const Point& p) const;
    bool contains(const Point& p) const;

    bool operator==(const Grid& other) const = default;

private:
    int dimension_;
    double half_width_;
    std::size_t points_;
    double spacing_;
    std::size_t cell_count_;
    double cell_volume_;
};

// Validating factory; rejects dimension outside {1,2,3} and odd or
// nonpositive points_per_axis.
Grid build_grid(int dimension, double half_width, std::size_t points_per_axis);

/// Real values on a Grid. All values finite; length equals the cell count.
class Field {
public:
    explicit Field(const Grid& grid);  // zero field
    Field(const Grid& grid, std::vector<double> values);

    const Grid& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }

    // Hands back the storage; the field is left empty.
    std::vector<double> release() && { return std::move(values_); }

    static Field constant(const Grid& grid, double value);

private:
    Grid grid_;
    std::vector<double> values_;
};

// a*x + b*y on a shared grid.
Field linear_combination(double a, const Field& x, double b, const Field& y);
Field scaled(const Field& x, double a);

using PointFunction = std::function<double(const Point&)>;

// values[i] = f(center_i); throws NumericalError naming the first cell with a
// non-finite value.
Field sample_function(const Grid& grid, const PointFunction& f);

enum class TestProfile { gaussian_bump, double_bump, random_modes };

// Width of the zero band along every face of the box.
inline constexpr double kBoundaryBand = 2.0;

/**
 * Deterministic smooth test fields for inequality checks.
 *
 * Every profile is multiplied by a C-infinity window that is exactly zero on
 * cells within kBoundaryBand of the box faces. Requires half_width > 2 * band.
 */
Field random_test_field(const Grid& grid, std::uint64_t seed, TestProfile profile);

}  // namespace nlheat
