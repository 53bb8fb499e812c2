#include "nlheat/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "nlheat/errors.hpp"

namespace nlheat {

double distance(const Point& a, const Point& b) {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    const double dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double norm(const Point& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]); }

Grid::Grid(int dimension, double half_width, std::size_t points_per_axis)
    : dimension_(dimension), half_width_(half_width), points_(points_per_axis) {
    if (dimension < 1 || dimension > 3) {
        throw InvalidArgument("grid dimension must be 1, 2 or 3");
    }
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
        throw InvalidArgument("grid half_width must be positive and finite");
    }
    if (points_per_axis < 2 || points_per_axis % 2 != 0) {
        throw InvalidArgument("grid points_per_axis must be an even integer >= 2");
    }
    spacing_ = 2.0 * half_width_ / static_cast<double>(points_);
    cell_count_ = 1;
    cell_volume_ = 1.0;
    for (int d = 0; d < dimension_; ++d) {
        cell_count_ *= points_;
        cell_volume_ *= spacing_;
    }
}

std::array<std::size_t, 3> Grid::multi_index(std::size_t flat) const {
    std::array<std::size_t, 3> idx{0, 0, 0};
    for (int d = dimension_ - 1; d >= 0; --d) {
        idx[d] = flat % points_;
        flat /= points_;
    }
    return idx;
}

std::size_t Grid::flat_index(const std::array<std::size_t, 3>& idx) const {
    std::size_t flat = 0;
    for (int d = 0; d < dimension_; ++d) flat = flat * points_ + idx[d];
    return flat;
}

Point Grid::center(std::size_t flat) const {
    const auto idx = multi_index(flat);
    Point p{0.0, 0.0, 0.0};
    for (int d = 0; d < dimension_; ++d) p[d] = coordinate(idx[d]);
    return p;
}

double Grid::distance_to_boundary(const Point& p) const {
    double best = half_width_;
    for (int d = 0; d < dimension_; ++d) best = std::min(best, half_width_ - std::abs(p[d]));
    return best;
}

bool Grid::contains(const Point& p) const {
    for (int d = 0; d < dimension_; ++d) {
        if (std::abs(p[d]) > half_width_) return false;
    }
    return true;
}

Grid build_grid(int dimension, double half_width, std::size_t points_per_axis) {
    return Grid(dimension, half_width, points_per_axis);
}

Field::Field(const Grid& grid) : grid_(grid), values_(grid.cell_count(), 0.0) {}

Field::Field(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.cell_count()) {
        throw InvalidArgument("field length does not match grid cell count");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            std::ostringstream msg;
            msg << "non-finite field value at cell " << i;
            throw NumericalError(msg.str());
        }
    }
}

Field Field::constant(const Grid& grid, double value) {
    return Field(grid, std::vector<double>(grid.cell_count(), value));
}

Field linear_combination(double a, const Field& x, double b, const Field& y) {
    if (!(x.grid() == y.grid())) throw InvalidArgument("fields live on different grids");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x[i] + b * y[i];
    return Field(x.grid(), std::move(out));
}

Field scaled(const Field& x, double a) {
    std::vector<double> out(x.values().begin(), x.values().end());
    for (double& v : out) v *= a;
    return Field(x.grid(), std::move(out));
}

Field sample_function(const Grid& grid, const PointFunction& f) {
    std::vector<double> values(grid.cell_count());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const Point c = grid.center(i);
        const double v = f(c);
        if (!std::isfinite(v)) {
            std::ostringstream msg;
            msg << "sampled function is not finite at cell " << i << " (";
            for (int d = 0; d < grid.dimension(); ++d) msg << (d ? ", " : "") << c[d];
            msg << ")";
            throw NumericalError(msg.str());
        }
        values[i] = v;
    }
    return Field(grid, std::move(values));
}

namespace {

// exp(-1/t) for t > 0, else 0.
double smooth_ramp(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

// C-infinity step: 0 for t <= 0, 1 for t >= 1.
double smooth_step(double t) {
    const double a = smooth_ramp(t);
    const double b = smooth_ramp(1.0 - t);
    return a / (a + b);
}

double boundary_window(const Grid& grid, const Point& p) {
    const double band = kBoundaryBand;
    const double taper = 0.5 * (grid.half_width() - band);
    double w = 1.0;
    for (int d = 0; d < grid.dimension(); ++d) {
        const double gap = grid.half_width() - std::abs(p[d]);
        w *= smooth_step((gap - band) / taper);
    }
    return w;
}

double gaussian(const Point& p, const Point& c, double width, int dim) {
    double r2 = 0.0;
    for (int d = 0; d < dim; ++d) r2 += (p[d] - c[d]) * (p[d] - c[d]);
    return std::exp(-0.5 * r2 / (width * width));
}

}  // namespace

Field random_test_field(const Grid& grid, std::uint64_t seed, TestProfile profile) {
    const double L = grid.half_width();
    if (!(L > 2.0 * kBoundaryBand)) {
        throw InvalidArgument("random_test_field needs half_width > 4 to leave room inside the boundary band");
    }
    const int dim = grid.dimension();
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(profile) + 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    PointFunction shape;
    switch (profile) {
        case TestProfile::gaussian_bump: {
            const double width = L / 8.0 * (1.0 + 0.25 * unit(rng));
            const double amplitude = 1.0 + unit(rng);
            shape = [=](const Point& p) { return amplitude * gaussian(p, Point{0, 0, 0}, width, dim); };
            break;
        }
        case TestProfile::double_bump: {
            std::array<Point, 2> centers{};
            std::array<double, 2> widths{};
            std::array<double, 2> amps{};
            for (int k = 0; k < 2; ++k) {
                for (int d = 0; d < dim; ++d) centers[k][d] = (2.0 * unit(rng) - 1.0) * L / 3.0;
                widths[k] = L / 10.0 * (1.0 + 0.5 * unit(rng));
                amps[k] = (unit(rng) < 0.5 ? -1.0 : 1.0) * (0.5 + unit(rng));
            }
            shape = [=](const Point& p) {
                return amps[0] * gaussian(p, centers[0], widths[0], dim) +
                       amps[1] * gaussian(p, centers[1], widths[1], dim);
            };
            break;
        }
        case TestProfile::random_modes: {
            constexpr int kModes = 6;
            std::array<Point, kModes> wave{};
            std::array<double, kModes> phase{};
            std::array<double, kModes> amp{};
            const double k_max = 3.0 * std::numbers::pi / L;  // wavelengths >= 2L/3
            for (int m = 0; m < kModes; ++m) {
                for (int d = 0; d < dim; ++d) wave[m][d] = (2.0 * unit(rng) - 1.0) * k_max;
                phase[m] = 2.0 * std::numbers::pi * unit(rng);
                amp[m] = 2.0 * unit(rng) - 1.0;
            }
            shape = [=](const Point& p) {
                double s = 0.0;
                for (int m = 0; m < kModes; ++m) {
                    double arg = phase[m];
                    for (int d = 0; d < dim; ++d) arg += wave[m][d] * p[d];
                    s += amp[m] * std::cos(arg);
                }
                return s;
            };
            break;
        }
    }
    return sample_function(grid, [&](const Point& p) {
        const double w = boundary_window(grid, p);
        return w == 0.0 ? 0.0 : w * shape(p);
    });
}

}  // namespace nlheat
