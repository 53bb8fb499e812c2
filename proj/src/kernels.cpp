#include "nlheat/kernels.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "nlheat/convolution.hpp"
#include "nlheat/errors.hpp"

namespace nlheat {

std::string to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::compact_smooth: return "compact_smooth";
        case KernelFamily::fractional_tail: return "fractional_tail";
        case KernelFamily::nonconvolution_fractional: return "nonconvolution_fractional";
        case KernelFamily::custom: return "custom";
    }
    return "unknown";
}

KernelFamily parse_kernel_family(const std::string& name) {
    if (name == "compact_smooth") return KernelFamily::compact_smooth;
    if (name == "fractional_tail") return KernelFamily::fractional_tail;
    if (name == "nonconvolution_fractional") return KernelFamily::nonconvolution_fractional;
    if (name == "custom") return KernelFamily::custom;
    throw InvalidArgument("unknown kernel family '" + name + "'");
}

KernelSpec fractional_tail_kernel(int dimension, double sigma, double c1, double cap) {
    KernelSpec spec;
    spec.family = KernelFamily::fractional_tail;
    spec.dimension = dimension;
    spec.sigma = sigma;
    spec.c1 = c1;
    spec.cap = cap;
    validate_spec(spec);
    return spec;
}

KernelSpec compact_smooth_kernel(int dimension, double radius, double cap) {
    KernelSpec spec;
    spec.family = KernelFamily::compact_smooth;
    spec.dimension = dimension;
    spec.radius = radius;
    spec.cap = cap;
    validate_spec(spec);
    return spec;
}

KernelSpec nonconvolution_kernel(int dimension, double sigma, double modulation, double c1, double cap) {
    KernelSpec spec;
    spec.family = KernelFamily::nonconvolution_fractional;
    spec.dimension = dimension;
    spec.sigma = sigma;
    spec.modulation = modulation;
    spec.c1 = c1;
    spec.cap = cap;
    validate_spec(spec);
    return spec;
}

KernelSpec custom_kernel(int dimension, PairFunction fn, double cap) {
    KernelSpec spec;
    spec.family = KernelFamily::custom;
    spec.dimension = dimension;
    spec.cap = cap;
    spec.custom = std::move(fn);
    validate_spec(spec);
    return spec;
}

void validate_spec(const KernelSpec& spec) {
    if (spec.dimension < 1 || spec.dimension > 3) throw InvalidArgument("kernel dimension must be 1, 2 or 3");
    if (!(spec.sigma > 0.0 && spec.sigma < 1.0)) throw InvalidArgument("sigma must lie in (0,1)");
    if (!(spec.c1 > 0.0) || !std::isfinite(spec.c1)) throw InvalidArgument("c1 must be positive");
    if (!(spec.c2 > 0.0) || !std::isfinite(spec.c2)) throw InvalidArgument("c2 must be positive");
    if (!(spec.cap > 0.0) || !std::isfinite(spec.cap)) throw InvalidArgument("cap must be positive");
    if (!(spec.modulation >= 0.0 && spec.modulation < 1.0)) throw InvalidArgument("modulation must lie in [0,1)");
    if (!(spec.radius > 0.0) || !std::isfinite(spec.radius)) throw InvalidArgument("radius must be positive");
    if (spec.mass && !(*spec.mass > 0.0)) throw InvalidArgument("mass must be positive");
    if (spec.family == KernelFamily::custom && !spec.custom) {
        throw InvalidArgument("custom kernel needs a pair function");
    }
}

namespace {

constexpr double kModulationFrequency = 0.5;

double power_tail(const KernelSpec& spec, double r) {
    if (r == 0.0) return spec.cap;
    return std::min(spec.cap, spec.c1 * std::pow(r, -spec.tail_exponent()));
}

double bump(double s) {
    if (s >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

double power(double base, int exponent) {
    double out = 1.0;
    for (int i = 0; i < exponent; ++i) out *= base;
    return out;
}

}  // namespace

double modulation_profile(const Point& x, int dimension) {
    double s = 0.0;
    for (int d = 0; d < dimension; ++d) s += x[d];
    return std::sin(kModulationFrequency * s);
}

double evaluate(const KernelSpec& spec, const Point& x, const Point& y) {
    switch (spec.family) {
        case KernelFamily::compact_smooth:
            return spec.cap * bump(distance(x, y) / spec.radius);
        case KernelFamily::fractional_tail:
            return power_tail(spec, distance(x, y));
        case KernelFamily::nonconvolution_fractional: {
            const double g = modulation_profile(x, spec.dimension) * modulation_profile(y, spec.dimension);
            return (1.0 + spec.modulation * g) * power_tail(spec, distance(x, y));
        }
        case KernelFamily::custom:
            return spec.custom(x, y);
    }
    return 0.0;
}

double evaluate_offset(const KernelSpec& spec, const Point& offset) {
    if (!spec.is_convolution()) throw UnsupportedOperation("offset evaluation needs a convolution kernel");
    return evaluate(spec, offset, Point{0.0, 0.0, 0.0});
}

double unit_sphere_area(int dimension) {
    switch (dimension) {
        case 1: return 2.0;
        case 2: return 2.0 * std::numbers::pi;
        case 3: return 4.0 * std::numbers::pi;
    }
    throw InvalidArgument("dimension must be 1, 2 or 3");
}

double unit_ball_volume(int dimension) { return unit_sphere_area(dimension) / dimension; }

double kernel_mass(const KernelSpec& spec) {
    const int n = spec.dimension;
    switch (spec.family) {
        case KernelFamily::fractional_tail: {
            // Cap binds inside r0, power tail outside.
            const double r0 = std::pow(spec.c1 / spec.cap, 1.0 / spec.tail_exponent());
            return spec.cap * unit_ball_volume(n) * power(r0, n) +
                   spec.c1 * unit_sphere_area(n) * std::pow(r0, -2.0 * spec.sigma) / (2.0 * spec.sigma);
        }
        case KernelFamily::compact_smooth: {
            using boost::math::quadrature::gauss_kronrod;
            const double radial = gauss_kronrod<double, 61>::integrate(
                [n](double s) { return power(s, n - 1) * bump(s); }, 0.0, 1.0, 15, 1e-14);
            return spec.cap * unit_sphere_area(n) * power(spec.radius, n) * radial;
        }
        default:
            throw UnsupportedOperation("kernel mass is defined for convolution kernels only");
    }
}

KernelSpec normalize_mass(const KernelSpec& spec, double target_mass) {
    if (!spec.is_convolution()) {
        throw UnsupportedOperation("normalize_mass supports compact_smooth and fractional_tail only");
    }
    if (!(target_mass > 0.0) || !std::isfinite(target_mass)) {
        throw InvalidArgument("target mass must be positive");
    }
    const double scale = target_mass / kernel_mass(spec);
    KernelSpec out = spec;
    out.cap *= scale;
    out.c1 *= scale;
    out.mass = target_mass;
    return out;
}

double exterior_tail_bound(const KernelSpec& spec, double R) {
    if (spec.family == KernelFamily::compact_smooth) {
        if (R >= spec.radius) return 0.0;
        throw InvalidArgument("exterior bound radius lies inside the compact support");
    }
    if (spec.family == KernelFamily::custom) return 0.0;
    const double r0 = std::pow(spec.c1 / spec.cap, 1.0 / spec.tail_exponent());
    if (R < r0) throw InvalidArgument("exterior bound radius lies inside the capped core");
    return spec.c1 * unit_sphere_area(spec.dimension) * std::pow(R, -2.0 * spec.sigma) / (2.0 * spec.sigma);
}

namespace {

// Visits every cell center of the grid lattice's continuation with
// |y - x| <= R, passing the center and whether it lies inside the box.
template <class Visit>
void for_each_lattice_point(const Grid& grid, const Point& x, double R, Visit&& visit) {
    const int dim = grid.dimension();
    const double h = grid.spacing();
    const double L = grid.half_width();
    const long M = static_cast<long>(grid.points_per_axis());
    std::array<long, 3> lo{0, 0, 0};
    std::array<long, 3> hi{0, 0, 0};
    for (int d = 0; d < dim; ++d) {
        lo[d] = static_cast<long>(std::floor((x[d] - R + L) / h - 0.5));
        hi[d] = static_cast<long>(std::ceil((x[d] + R + L) / h - 0.5));
    }
    const double R2 = R * R;
    std::array<long, 3> i{0, 0, 0};
    for (i[0] = lo[0]; i[0] <= hi[0]; ++i[0]) {
        for (i[1] = lo[1]; i[1] <= hi[1]; ++i[1]) {
            for (i[2] = lo[2]; i[2] <= hi[2]; ++i[2]) {
                Point y{0.0, 0.0, 0.0};
                double r2 = 0.0;
                bool inside = true;
                for (int d = 0; d < dim; ++d) {
                    y[d] = -L + (static_cast<double>(i[d]) + 0.5) * h;
                    r2 += (y[d] - x[d]) * (y[d] - x[d]);
                    inside = inside && i[d] >= 0 && i[d] < M;
                }
                if (r2 <= R2) visit(y, inside);
            }
        }
    }
}

}  // namespace

double lattice_offset_sum(const Grid& grid, double R, const std::function<double(const Point&)>& weight,
                          bool include_origin) {
    const int dim = grid.dimension();
    const double h = grid.spacing();
    const long K = static_cast<long>(std::floor(R / h));
    std::array<long, 3> k{0, 0, 0};
    std::array<long, 3> lim{0, 0, 0};
    for (int d = 0; d < dim; ++d) lim[d] = K;
    const double R2 = R * R;
    double sum = 0.0;
    for (k[0] = -lim[0]; k[0] <= lim[0]; ++k[0]) {
        for (k[1] = -lim[1]; k[1] <= lim[1]; ++k[1]) {
            for (k[2] = -lim[2]; k[2] <= lim[2]; ++k[2]) {
                const Point z{static_cast<double>(k[0]) * h, static_cast<double>(k[1]) * h,
                              static_cast<double>(k[2]) * h};
                const double r2 = z[0] * z[0] + z[1] * z[1] + z[2] * z[2];
                if (r2 > R2 || (r2 == 0.0 && !include_origin)) continue;
                sum += weight(z);
            }
        }
    }
    return sum * grid.cell_volume();
}

double tail_mass(const KernelSpec& spec, const Grid& grid, const Point& x) {
    const double R = spec.family == KernelFamily::compact_smooth ? spec.radius : exterior_radius(grid);
    if (spec.family == KernelFamily::compact_smooth && grid.distance_to_boundary(x) >= spec.radius) {
        return 0.0;
    }
    double sum = 0.0;
    for_each_lattice_point(grid, x, R, [&](const Point& y, bool inside) {
        if (!inside) sum += evaluate(spec, x, y);
    });
    sum *= grid.cell_volume();
    if (spec.has_fractional_tail()) sum += exterior_tail_bound(spec, R);
    return sum;
}

std::vector<double> tail_mass_all(const KernelSpec& spec, const Grid& grid) {
    const std::size_t N = grid.cell_count();
    std::vector<double> tail(N, 0.0);
    if (!spec.has_fractional_tail()) {
        for (std::size_t i = 0; i < N; ++i) tail[i] = tail_mass(spec, grid, grid.center(i));
        return tail;
    }

    // Lattice mass over the ball of radius R around any cell, split into
    // interior (a convolution over the box) and exterior (the complement).
    const double R = exterior_radius(grid);
    const double hn = grid.cell_volume();
    const int dim = spec.dimension;
    KernelSpec profile = spec;
    profile.family = KernelFamily::fractional_tail;
    profile.modulation = 0.0;
    auto tail_profile = [&](const Point& z) { return power_tail(profile, norm(z)); };

    const double ball = lattice_offset_sum(grid, R, tail_profile, false) + exterior_tail_bound(profile, R);
    LatticeConvolver conv(grid, [&](const Point& z) {
        return (z[0] == 0.0 && z[1] == 0.0 && z[2] == 0.0) ? 0.0 : tail_profile(z) * hn;
    });
    const std::vector<double> ones(N, 1.0);
    const std::vector<double> interior = conv.apply(ones);
    for (std::size_t i = 0; i < N; ++i) tail[i] = ball - interior[i];

    if (spec.family == KernelFamily::nonconvolution_fractional && spec.modulation != 0.0) {
        // g(x + z) = sin(a + b) with T even, so sum_z g(x + z) T(z) = g(x) sum_z cos(b) T(z).
        const double cos_ball = lattice_offset_sum(grid, R, [&](const Point& z) {
            double s = 0.0;
            for (int d = 0; d < dim; ++d) s += z[d];
            return std::cos(kModulationFrequency * s) * tail_profile(z);
        }, false);
        std::vector<double> g(N);
        for (std::size_t i = 0; i < N; ++i) g[i] = modulation_profile(grid.center(i), dim);
        const std::vector<double> interior_g = conv.apply(g);
        for (std::size_t i = 0; i < N; ++i) {
            tail[i] += spec.modulation * g[i] * (g[i] * cos_ball - interior_g[i]);
        }
    }
    for (double& t : tail) t = std::max(t, 0.0);
    return tail;
}

KernelReport validate_kernel(const KernelSpec& spec, const Grid& grid, std::size_t sample_count) {
    if (sample_count < 1) throw InvalidArgument("sample_count must be at least 1");
    validate_spec(spec);
    const int dim = grid.dimension();
    const double L = grid.half_width();
    std::mt19937_64 rng(0x5eed5eedULL);
    std::uniform_real_distribution<double> coord(-L, L);
    std::uniform_int_distribution<std::size_t> cell(0, grid.cell_count() - 1);
    auto random_point = [&] {
        Point p{0.0, 0.0, 0.0};
        for (int d = 0; d < dim; ++d) p[d] = coord(rng);
        return p;
    };

    KernelReport report;
    report.max_value = evaluate(spec, Point{0, 0, 0}, Point{0, 0, 0});

    // (J2) lower constant: the modulation factor can dip to 1 - modulation.
    const double lower_c1 = spec.family == KernelFamily::nonconvolution_fractional
                                ? spec.c1 * (1.0 - spec.modulation)
                                : spec.c1;
    double worst = std::numeric_limits<double>::infinity();
    const std::size_t pair_count = std::max<std::size_t>(64, 16 * sample_count);
    for (std::size_t s = 0; s < pair_count; ++s) {
        const Point x = random_point();
        const Point y = random_point();
        const double jxy = evaluate(spec, x, y);
        const double jyx = evaluate(spec, y, x);
        report.symmetry_defect = std::max(report.symmetry_defect, std::abs(jxy - jyx));
        report.max_value = std::max(report.max_value, jxy);
        const double r = distance(x, y);
        if (r > spec.c2) worst = std::min(worst, jxy / (lower_c1 * std::pow(r, -spec.tail_exponent())));
    }
    // Radial probes just beyond the tail onset, where a cap would bind first.
    for (int k = 1; k <= 32; ++k) {
        const double r = spec.c2 * (1.0 + 0.05 * k);
        const Point x = random_point();
        Point y = x;
        y[0] += r;
        const double jxy = evaluate(spec, x, y);
        worst = std::min(worst, jxy / (lower_c1 * std::pow(r, -spec.tail_exponent())));
    }
    report.worst_tail_ratio = std::isfinite(worst) ? worst : 0.0;
    // Equality holds by construction beyond the cap; allow for rounding in pow.
    report.tail_bound_satisfied = std::isfinite(worst) && worst >= 1.0 - 1e-12;

    // (J1): lattice row sum (self cell included, midpoint rule) plus exterior mass.
    std::vector<std::size_t> rows;
    {
        std::array<std::size_t, 3> mid{0, 0, 0};
        for (int d = 0; d < dim; ++d) mid[d] = grid.points_per_axis() / 2;
        rows.push_back(grid.flat_index(mid));
    }
    while (rows.size() < sample_count) rows.push_back(cell(rng));
    double row_integral = 0.0;
    for (std::size_t i : rows) {
        const Point x = grid.center(i);
        double sum = 0.0;
        for (std::size_t j = 0; j < grid.cell_count(); ++j) sum += evaluate(spec, x, grid.center(j));
        sum = sum * grid.cell_volume() + tail_mass(spec, grid, x);
        row_integral = std::max(row_integral, sum);
    }
    report.row_integral_estimate = row_integral;
    return report;
}

}  // namespace nlheat
