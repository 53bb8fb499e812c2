#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "nlheat/errors.hpp"
#include "nlheat/kernels.hpp"

using namespace nlheat;

namespace {

Point random_point(std::mt19937_64& rng, int dim, double L) {
    std::uniform_real_distribution<double> c(-L, L);
    Point p{0, 0, 0};
    for (int d = 0; d < dim; ++d) p[d] = c(rng);
    return p;
}

// Midpoint rule on [a, b] with n panels.
template <class F>
double midpoint(F&& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += f(a + (k + 0.5) * h);
    return s * h;
}

std::vector<KernelSpec> all_families(int dim) {
    return {fractional_tail_kernel(dim, 0.5), compact_smooth_kernel(dim, 1.5, 2.0),
            nonconvolution_kernel(dim, 0.3, 0.4),
            custom_kernel(dim, [](const Point& x, const Point& y) { return 1.0 / (1.0 + distance(x, y)); }, 1.0)};
}

}  // namespace

TEST_CASE("evaluate matches the family formulas") {
    const KernelSpec frac = fractional_tail_kernel(1, 0.5, 1.0, 1.0);
    CHECK(evaluate(frac, Point{0, 0, 0}, Point{2, 0, 0}) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(evaluate(frac, Point{0, 0, 0}, Point{0.5, 0, 0}) == 1.0);  // capped core

    const KernelSpec bump = compact_smooth_kernel(1, 1.0);
    CHECK(evaluate(bump, Point{0, 0, 0}, Point{1.5, 0, 0}) == 0.0);
    CHECK(evaluate(bump, Point{0, 0, 0}, Point{0, 0, 0}) == doctest::Approx(1.0));
}

TEST_CASE("evaluation is exactly symmetric and bounded") {
    std::mt19937_64 rng(1);
    for (int dim = 1; dim <= 3; ++dim) {
        for (const KernelSpec& spec : all_families(dim)) {
            for (int k = 0; k < 10000; ++k) {
                const Point x = random_point(rng, dim, 6.0);
                const Point y = random_point(rng, dim, 6.0);
                const double v = evaluate(spec, x, y);
                CHECK(v == evaluate(spec, y, x));
                CHECK(v >= 0.0);
                CHECK(v <= spec.cap * (1.0 + spec.modulation));
            }
        }
    }
}

TEST_CASE("tail families dominate c1 (1 - m) |x-y|^-(n+2 sigma) beyond distance 1") {
    std::mt19937_64 rng(2);
    for (int dim = 1; dim <= 3; ++dim) {
        for (const KernelSpec& spec : {fractional_tail_kernel(dim, 0.7, 0.5, 1.0), nonconvolution_kernel(dim, 0.4, 0.3)}) {
            for (int k = 0; k < 5000; ++k) {
                const Point x = random_point(rng, dim, 10.0);
                const Point y = random_point(rng, dim, 10.0);
                const double r = distance(x, y);
                if (r <= 1.0) continue;
                CHECK(evaluate(spec, x, y) * std::pow(r, spec.tail_exponent()) >=
                      spec.c1 * (1.0 - spec.modulation) * (1.0 - 1e-14));
            }
        }
    }
}

TEST_CASE("modulation profile is odd and bounded") {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 1000; ++k) {
        const Point x = random_point(rng, 3, 20.0);
        const Point mx{-x[0], -x[1], -x[2]};
        CHECK(std::abs(modulation_profile(x, 3)) <= 1.0);
        CHECK(modulation_profile(mx, 3) == doctest::Approx(-modulation_profile(x, 3)));
    }
}

TEST_CASE("validate_spec names the violated constraint") {
    KernelSpec s = fractional_tail_kernel(2, 0.5);
    s.sigma = 1.5;
    try {
        validate_spec(s);
        FAIL("expected InvalidArgument");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()) == "sigma must lie in (0,1)");
    }
    s = fractional_tail_kernel(2, 0.5);
    s.modulation = 1.0;
    CHECK_THROWS_AS(validate_spec(s), InvalidArgument);
}

TEST_CASE("kernel_mass agrees with independent quadrature") {
    // Fractional n=1, sigma=1/2: 2 (1 + int_1^inf r^-2 dr) = 4.
    // int_1^R r^-2 dr in log variables, plus the analytic remainder 1/R.
    const double R = 1e3;
    const double oracle_frac = 2.0 * (1.0 + midpoint([](double u) { return std::exp(-u); }, 0.0, std::log(R), 200000) + 1.0 / R);
    CHECK(kernel_mass(fractional_tail_kernel(1, 0.5)) == doctest::Approx(oracle_frac).epsilon(1e-7));
    CHECK(kernel_mass(fractional_tail_kernel(1, 0.5)) == doctest::Approx(4.0).epsilon(1e-12));

    // 2-D radial integral of min(cap, c1 r^-(2+2s)) = 2 pi (cap r0^2 / 2 + c1 r0^-2s / (2 s)).
    const double s = 0.3;
    const double c1 = 2.0;
    const double cap = 0.5;
    const double r0 = std::pow(c1 / cap, 1.0 / (2.0 + 2.0 * s));
    const double oracle_2d = 2.0 * std::numbers::pi * (cap * r0 * r0 / 2.0 + c1 * std::pow(r0, -2.0 * s) / (2.0 * s));
    CHECK(kernel_mass(fractional_tail_kernel(2, s, c1, cap)) == doctest::Approx(oracle_2d).epsilon(1e-12));

    for (int dim = 1; dim <= 3; ++dim) {
        const double radius = 1.3;
        auto bump = [&](double r) {
            const double t = r / radius;
            return t < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - t * t)) : 0.0;
        };
        const double oracle = unit_sphere_area(dim) *
                              midpoint([&](double r) { return bump(r) * std::pow(r, dim - 1); }, 0.0, radius, 200000);
        CHECK(kernel_mass(compact_smooth_kernel(dim, radius)) == doctest::Approx(oracle).epsilon(1e-8));
    }
}

TEST_CASE("normalize_mass") {
    const KernelSpec raw = fractional_tail_kernel(1, 0.5);
    const KernelSpec unit = normalize_mass(raw, 1.0);
    CHECK(unit.c1 == doctest::Approx(0.25));
    CHECK(unit.cap == doctest::Approx(0.25));
    CHECK(kernel_mass(unit) == doctest::Approx(1.0).epsilon(1e-10));

    const KernelSpec again = normalize_mass(unit, 1.0);
    CHECK(again.c1 == doctest::Approx(unit.c1).epsilon(1e-10));

    for (const KernelSpec& k : {fractional_tail_kernel(2, 0.35, 1.5, 0.7), compact_smooth_kernel(3, 2.0, 0.4)}) {
        const KernelSpec back = normalize_mass(normalize_mass(k, 2.0), kernel_mass(k));
        CHECK(back.c1 == doctest::Approx(k.c1).epsilon(1e-6));
        CHECK(back.cap == doctest::Approx(k.cap).epsilon(1e-6));
    }
    CHECK_THROWS_AS(normalize_mass(nonconvolution_kernel(2, 0.5, 0.3), 1.0), UnsupportedOperation);
}

TEST_CASE("exterior tail bound is the analytic radial integral") {
    const KernelSpec k = fractional_tail_kernel(1, 0.5);
    for (double R : {1.5, 4.0, 80.0}) CHECK(exterior_tail_bound(k, R) == doctest::Approx(2.0 / R).epsilon(1e-14));
    CHECK(exterior_tail_bound(compact_smooth_kernel(2, 1.0), 1.0) == 0.0);
}

TEST_CASE("tail_mass") {
    const Grid g = build_grid(2, 5.0, 20);
    CHECK(tail_mass(compact_smooth_kernel(2, 1.0), g, Point{0, 0, 0}) == 0.0);

    // 1-D: mass of |z|^-2 beyond the box seen from the origin is 2/L.
    const Grid line = build_grid(1, 5.0, 200);
    CHECK(tail_mass(fractional_tail_kernel(1, 0.5), line, Point{0, 0, 0}) == doctest::Approx(0.4).epsilon(1e-3));

    const KernelSpec frac = fractional_tail_kernel(2, 0.5);
    const double center = tail_mass(frac, g, g.center(g.flat_index({10, 10, 0})));
    const double edge = tail_mass(frac, g, g.center(g.flat_index({0, 10, 0})));
    CHECK(edge > center);

    // Same spacing, larger box: less mass outside.
    const Grid wide = build_grid(2, 10.0, 40);
    CHECK(tail_mass(frac, wide, Point{0.125, 0.125, 0}) <= tail_mass(frac, g, Point{0.125, 0.125, 0}));
}

TEST_CASE("tail_mass_all matches the direct exterior sum") {
    const Grid g = build_grid(2, 3.0, 12);
    for (const KernelSpec& spec : {fractional_tail_kernel(2, 0.5), nonconvolution_kernel(2, 0.4, 0.3),
                                   compact_smooth_kernel(2, 1.2)}) {
        const std::vector<double> all = tail_mass_all(spec, g);
        for (std::size_t i = 0; i < g.cell_count(); i += 7) {
            CHECK(all[i] == doctest::Approx(tail_mass(spec, g, g.center(i))).epsilon(1e-8).scale(1.0));
        }
    }
}

TEST_CASE("validate_kernel") {
    const Grid g = build_grid(1, 10.0, 200);
    const KernelReport compact = validate_kernel(compact_smooth_kernel(1, 1.0), g, 4);
    CHECK_FALSE(compact.tail_bound_satisfied);
    CHECK(compact.symmetry_defect == 0.0);

    const KernelReport frac = validate_kernel(fractional_tail_kernel(1, 0.5), g, 4);
    CHECK(frac.tail_bound_satisfied);
    CHECK(frac.worst_tail_ratio >= 1.0 - 1e-12);
    CHECK(frac.max_value <= 1.0);
    CHECK(frac.row_integral_estimate == doctest::Approx(4.0).epsilon(1e-2));

    const KernelReport nc = validate_kernel(nonconvolution_kernel(2, 0.5, 0.3), build_grid(2, 6.0, 24), 2);
    CHECK(nc.tail_bound_satisfied);
    CHECK_THROWS_AS(validate_kernel(fractional_tail_kernel(1, 0.5), g, 0), InvalidArgument);
}
