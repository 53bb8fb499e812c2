#include <cmath>

#include "doctest.h"
#include "nlheat/errors.hpp"
#include "nlheat/grid.hpp"

using namespace nlheat;

TEST_CASE("build_grid coordinates follow the cell-centered formula") {
    const Grid g = build_grid(1, 1.0, 2);
    CHECK(g.spacing() == 1.0);
    CHECK(g.cell_count() == 2);
    CHECK(g.center(0)[0] == -0.5);
    CHECK(g.center(1)[0] == 0.5);

    const Grid big = build_grid(2, 40.0, 128);
    CHECK(big.spacing() == 0.625);
    CHECK(big.cell_count() == 16384);
    CHECK(big.cell_volume() == doctest::Approx(0.625 * 0.625).epsilon(1e-15));
}

TEST_CASE("build_grid rejects bad shapes") {
    CHECK_THROWS_AS(build_grid(1, 1.0, 3), InvalidArgument);
    CHECK_THROWS_AS(build_grid(1, 1.0, 0), InvalidArgument);
    CHECK_THROWS_AS(build_grid(0, 1.0, 4), InvalidArgument);
    CHECK_THROWS_AS(build_grid(4, 1.0, 4), InvalidArgument);
    CHECK_THROWS_AS(build_grid(2, -1.0, 4), InvalidArgument);
}

TEST_CASE("flat and multi indices round trip, axis 0 slowest") {
    const Grid g = build_grid(3, 2.0, 4);
    for (std::size_t i = 0; i < g.cell_count(); ++i) CHECK(g.flat_index(g.multi_index(i)) == i);
    const auto idx = g.multi_index(1);
    CHECK(idx[0] == 0);
    CHECK(idx[2] == 1);
}

TEST_CASE("reversing every axis negates coordinates exactly") {
    for (int n = 1; n <= 3; ++n) {
        const Grid g = build_grid(n, 3.7, 10);
        for (std::size_t i = 0; i < g.cell_count(); ++i) {
            auto idx = g.multi_index(i);
            for (int d = 0; d < n; ++d) idx[d] = g.points_per_axis() - 1 - idx[d];
            const Point a = g.center(i);
            const Point b = g.center(g.flat_index(idx));
            for (int d = 0; d < n; ++d) CHECK(a[d] == -b[d]);
        }
    }
}

TEST_CASE("sample_function basics") {
    const Grid g = build_grid(1, 1.0, 2);
    const Field zero = sample_function(g, [](const Point&) { return 0.0; });
    const Field one = sample_function(g, [](const Point&) { return 1.0; });
    for (double v : zero.values()) CHECK(v == 0.0);
    for (double v : one.values()) CHECK(v == 1.0);
    // Both centers (+-0.5) satisfy |x| <= L/2 = 0.5.
    const Field ind = sample_function(g, [](const Point& x) { return std::abs(x[0]) <= 0.5 ? 1.0 : 0.0; });
    CHECK(ind[0] == 1.0);
    CHECK(ind[1] == 1.0);
}

TEST_CASE("sample_function names the first non-finite cell") {
    const Grid g = build_grid(1, 1.0, 4);
    try {
        sample_function(g, [](const Point& x) { return x[0] > 0.0 ? std::nan("") : 1.0; });
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("cell 2") != std::string::npos);
    }
}

TEST_CASE("sample_function is linear") {
    const Grid g = build_grid(2, 5.0, 16);
    auto f = [](const Point& x) { return std::sin(x[0]) * std::cos(0.3 * x[1]); };
    auto h = [](const Point& x) { return std::exp(-x[0] * x[0] - x[1] * x[1]); };
    const double a = 2.5;
    const double b = -1.25;
    const Field combined = sample_function(g, [&](const Point& x) { return a * f(x) + b * h(x); });
    const Field separate = linear_combination(a, sample_function(g, f), b, sample_function(g, h));
    for (std::size_t i = 0; i < g.cell_count(); ++i) CHECK(combined[i] == doctest::Approx(separate[i]).epsilon(1e-14));
}

TEST_CASE("Field rejects wrong length and non-finite values") {
    const Grid g = build_grid(1, 1.0, 2);
    CHECK_THROWS_AS(Field(g, std::vector<double>{1.0}), InvalidArgument);
    CHECK_THROWS_AS(Field(g, std::vector<double>{1.0, INFINITY}), NumericalError);
}

TEST_CASE("random_test_field is deterministic and boundary clean") {
    for (int n = 1; n <= 3; ++n) {
        const Grid g = build_grid(n, 10.0, n == 3 ? 16 : 64);
        for (auto profile : {TestProfile::gaussian_bump, TestProfile::double_bump, TestProfile::random_modes}) {
            for (std::uint64_t seed = 0; seed < 5; ++seed) {
                const Field a = random_test_field(g, seed, profile);
                const Field b = random_test_field(g, seed, profile);
                bool nonzero = false;
                for (std::size_t i = 0; i < g.cell_count(); ++i) {
                    CHECK(a[i] == b[i]);
                    nonzero = nonzero || a[i] != 0.0;
                    if (g.distance_to_boundary(g.center(i)) <= kBoundaryBand) CHECK(a[i] == 0.0);
                }
                CHECK(nonzero);
            }
        }
    }
}

TEST_CASE("gaussian_bump peaks near the origin") {
    const Grid g = build_grid(2, 40.0, 128);
    const Field u = random_test_field(g, 3, TestProfile::gaussian_bump);
    std::size_t arg = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] > u[arg]) arg = i;
    }
    CHECK(norm(g.center(arg)) <= 10.0);
}

TEST_CASE("random_test_field needs room for the band") {
    CHECK_THROWS_AS(random_test_field(build_grid(1, 4.0, 16), 0, TestProfile::gaussian_bump), InvalidArgument);
}
