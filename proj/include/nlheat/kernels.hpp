#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nlheat/grid.hpp"

namespace nlheat {

enum class KernelFamily { compact_smooth, fractional_tail, nonconvolution_fractional, custom };

std::string to_string(KernelFamily family);
KernelFamily parse_kernel_family(const std::string& name);

using PairFunction = std::function<double(const Point&, const Point&)>;

/**
 * Kernel J(x, y) with its structural parameters.
 *
 * fractional_tail:            min(cap, c1 |x-y|^-(n+2 sigma))
 * nonconvolution_fractional:  (1 + modulation g(x) g(y)) min(cap, c1 |x-y|^-(n+2 sigma))
 * compact_smooth:             cap * exp(1 - 1/(1 - (|x-y|/radius)^2)) inside the radius
 * custom:                     user function, bounded by cap
 *
 * c2 is the tail onset: the lower bound c1 |x-y|^-(n+2 sigma) is promised
 * only for |x-y| > c2.
 */
struct KernelSpec {
    KernelFamily family = KernelFamily::fractional_tail;
    int dimension = 2;
    double sigma = 0.5;
    double c1 = 1.0;
    double c2 = 1.0;
    double cap = 1.0;
    double modulation = 0.0;
    double radius = 1.0;  // support radius, compact_smooth only
    std::optional<double> mass;
    PairFunction custom;

    bool is_convolution() const {
        return family == KernelFamily::compact_smooth || family == KernelFamily::fractional_tail;
    }
    bool has_fractional_tail() const {
        return family == KernelFamily::fractional_tail || family == KernelFamily::nonconvolution_fractional;
    }
    // Exponent n + 2 sigma of the power tail.
    double tail_exponent() const { return dimension + 2.0 * sigma; }
};

KernelSpec fractional_tail_kernel(int dimension, double sigma, double c1 = 1.0, double cap = 1.0);
KernelSpec compact_smooth_kernel(int dimension, double radius = 1.0, double cap = 1.0);
KernelSpec nonconvolution_kernel(int dimension, double sigma, double modulation, double c1 = 1.0,
                                 double cap = 1.0);
KernelSpec custom_kernel(int dimension, PairFunction fn, double cap);

// Throws InvalidArgument naming the first violated parameter constraint.
void validate_spec(const KernelSpec& spec);

// Bounded smooth odd profile g with |g| <= 1 used by the nonconvolution family.
double modulation_profile(const Point& x, int dimension);

double evaluate(const KernelSpec& spec, const Point& x, const Point& y);

// Convolution profile J(z) = J(z, 0); only for convolution families.
double evaluate_offset(const KernelSpec& spec, const Point& offset);

// Surface area of the unit sphere S^{n-1} and volume of the unit ball.
double unit_sphere_area(int dimension);
double unit_ball_volume(int dimension);

// Continuum mass of a convolution kernel. Closed form for fractional_tail,
// adaptive Gauss-Kronrod for the compact bump.
double kernel_mass(const KernelSpec& spec);

// Rescales cap and c1 jointly so kernel_mass == target_mass.
KernelSpec normalize_mass(const KernelSpec& spec, double target_mass);

/// Integral of J(x, .) over |y - x| > R using the power tail.
/// Zero for compact kernels once R exceeds the support radius.
double exterior_tail_bound(const KernelSpec& spec, double R);

// sum of weight(k h) h^n over integer offsets k with |k h| <= R.
double lattice_offset_sum(const Grid& grid, double R, const std::function<double(const Point&)>& weight,
                          bool include_origin);

// Extended-lattice truncation radius for exterior sums.
inline double exterior_radius(const Grid& grid) { return 8.0 * grid.half_width(); }

/**
 * Mass of J(x, .) outside the box.
 *
 * Sums J(x, y) h^n over the continuation of the grid lattice outside the box
 * with |y - x| <= 8L, then adds exterior_tail_bound(8L).
 */
double tail_mass(const KernelSpec& spec, const Grid& grid, const Point& x);

// tail_mass at every cell center. Tail families use the complement identity
// (lattice mass minus interior row sum), which costs one convolution instead
// of an exterior sum per cell.
std::vector<double> tail_mass_all(const KernelSpec& spec, const Grid& grid);

struct KernelReport {
    double symmetry_defect = 0.0;
    double max_value = 0.0;
    double row_integral_estimate = 0.0;
    bool tail_bound_satisfied = false;
    double worst_tail_ratio = 0.0;
};

KernelReport validate_kernel(const KernelSpec& spec, const Grid& grid, std::size_t sample_count);

}  // namespace nlheat
