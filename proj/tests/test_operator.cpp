#include <cmath>
#include <random>

#include "doctest.h"
#include "nlheat/errors.hpp"
#include "nlheat/functionals.hpp"
#include "nlheat/nonlocal_operator.hpp"

using namespace nlheat;

namespace {

// Three coupled unit cells at -1.5, -0.5, 0.5 with J = 1 among them; the
// fourth cell (1.5) is decoupled. Stands in for the M = 3, h = 1 examples,
// which an even-M grid cannot host directly.
KernelSpec three_cell_kernel() {
    return custom_kernel(
        1, [](const Point& x, const Point& y) { return x[0] < 1.0 && y[0] < 1.0 ? 1.0 : 0.0; }, 1.0);
}

Field random_field(const Grid& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> v(-1.0, 1.0);
    std::vector<double> values(g.cell_count());
    for (double& x : values) x = v(rng);
    return Field(g, std::move(values));
}

double dot(const Field& a, const Field& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double max_abs(const Field& a) { return lq_norm(a, kInfinity); }

std::vector<Strategy> strategies_for(const KernelSpec& spec) {
    if (spec.is_convolution()) return {Strategy::dense, Strategy::on_the_fly, Strategy::fft_convolution};
    return {Strategy::dense, Strategy::on_the_fly};
}

}  // namespace

TEST_CASE("three-cell hand example") {
    const Grid g = build_grid(1, 2.0, 4);
    for (Strategy s : {Strategy::dense, Strategy::on_the_fly}) {
        const auto op = OperatorApplier::assemble(three_cell_kernel(), g, BoundaryMode::conservative, s);
        const Field lu = op.apply(Field(g, {0.0, 1.0, 0.0, 0.0}));
        CHECK(lu[0] == 1.0);
        CHECK(lu[1] == -2.0);
        CHECK(lu[2] == 1.0);
        CHECK(lu[3] == 0.0);
        CHECK(op.row_sums()[0] == 2.0);
        CHECK(op.row_sums()[1] == 2.0);
        CHECK(op.row_sums()[2] == 2.0);
        CHECK(op.weight(1, 1) == 0.0);
        CHECK(op.weight(0, 2) == 1.0);
    }
}

TEST_CASE("constants are annihilated or absorbed exactly") {
    const Grid g = build_grid(2, 4.0, 16);
    for (const KernelSpec& spec : {fractional_tail_kernel(2, 0.5), compact_smooth_kernel(2, 1.3),
                                   nonconvolution_kernel(2, 0.4, 0.3)}) {
        for (Strategy s : strategies_for(spec)) {
            const Field ones = Field::constant(g, 1.0);
            const auto cons = OperatorApplier::assemble(spec, g, BoundaryMode::conservative, s);
            const Field annihilated = cons.apply(ones);
            for (double v : annihilated.values()) CHECK(v == 0.0);
            const auto abs = OperatorApplier::assemble(spec, g, BoundaryMode::absorbing, s);
            const Field lu = abs.apply(ones);
            for (std::size_t i = 0; i < g.cell_count(); ++i) {
                CHECK(lu[i] == -abs.tail()[i]);
                CHECK(abs.row_sums()[i] >= cons.row_sums()[i]);
                CHECK(cons.tail()[i] == 0.0);
            }
            const Field zero = cons.apply(Field(g));
            for (double v : zero.values()) CHECK(v == 0.0);
        }
    }
}

TEST_CASE("strategies agree") {
    const Grid g = build_grid(2, 5.0, 32);
    for (const KernelSpec& spec : {fractional_tail_kernel(2, 0.5), compact_smooth_kernel(2, 1.3),
                                   nonconvolution_kernel(2, 0.4, 0.3)}) {
        for (BoundaryMode mode : {BoundaryMode::conservative, BoundaryMode::absorbing}) {
            const Field u = random_field(g, 5);
            const auto dense = OperatorApplier::assemble(spec, g, mode, Strategy::dense);
            const auto fly = OperatorApplier::assemble(spec, g, mode, Strategy::on_the_fly);
            const Field a = dense.apply(u);
            const Field b = fly.apply(u);
            const double scale = max_abs(a);
            CHECK(max_abs(linear_combination(1.0, a, -1.0, b)) <= 1e-12 * scale);
            if (spec.is_convolution()) {
                const auto fft = OperatorApplier::assemble(spec, g, mode, Strategy::fft_convolution);
                CHECK(max_abs(linear_combination(1.0, fft.apply(u), -1.0, b)) <= 1e-8 * scale);
            }
        }
    }
}

TEST_CASE("linearity, self-adjointness, mass annihilation, semidefiniteness") {
    const Grid g = build_grid(2, 5.0, 24);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> alpha(-10.0, 10.0);
    for (const KernelSpec& spec : {fractional_tail_kernel(2, 0.3), nonconvolution_kernel(2, 0.6, 0.5)}) {
        for (Strategy s : strategies_for(spec)) {
            const auto op = OperatorApplier::assemble(spec, g, BoundaryMode::conservative, s);
            for (std::uint64_t k = 0; k < 5; ++k) {
                const Field u = random_field(g, 100 + k);
                const Field v = random_field(g, 200 + k);
                const Field lu = op.apply(u);
                const Field lv = op.apply(v);
                const double a = alpha(rng);
                const Field scaled_first = op.apply(scaled(u, a));
                CHECK(max_abs(linear_combination(1.0, scaled_first, -a, lu)) <= 1e-12 * std::abs(a) * max_abs(lu));
                CHECK(dot(lu, v) == doctest::Approx(dot(u, lv)).epsilon(1e-12));
                double sum = 0.0;
                double l1 = 0.0;
                for (std::size_t i = 0; i < u.size(); ++i) {
                    sum += lu[i];
                    l1 += std::abs(u[i]);
                }
                CHECK(std::abs(sum) <= 1e-12 * l1);
                CHECK(dot(lu, u) <= 0.0);
            }
        }
    }
}

TEST_CASE("row sums converge to the kernel mass under refinement") {
    const KernelSpec spec = fractional_tail_kernel(1, 0.5);
    double previous_error = INFINITY;
    for (std::size_t M : {40, 80, 160}) {
        const Grid g = build_grid(1, 10.0, M);
        const auto op = OperatorApplier::assemble(spec, g, BoundaryMode::absorbing, Strategy::dense);
        const double D = op.row_sums()[M / 2];
        const double error = std::abs(D - kernel_mass(spec));
        CHECK(error < previous_error);
        previous_error = error;
        // The missing piece is the excluded self weight J(0) h, which vanishes with h.
        const double with_self = D + evaluate_offset(spec, Point{0, 0, 0}) * g.cell_volume();
        CHECK(with_self == doctest::Approx(validate_kernel(spec, g, 1).row_integral_estimate).epsilon(1e-12));
        // Midpoint rule across the kink of min(cap, tail): second order.
        CHECK(std::abs(with_self - kernel_mass(spec)) <= 0.4 * g.spacing() * g.spacing());
    }
}

TEST_CASE("assembly errors") {
    const Grid g = build_grid(2, 4.0, 16);
    CHECK_THROWS_AS(OperatorApplier::assemble(nonconvolution_kernel(2, 0.5, 0.3), g, BoundaryMode::conservative,
                                              Strategy::fft_convolution),
                    UnsupportedOperation);
    try {
        OperatorApplier::assemble(fractional_tail_kernel(2, 0.5), g, BoundaryMode::conservative, Strategy::dense, 1024);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("on_the_fly") != std::string::npos);
    }
    const auto op = OperatorApplier::assemble(fractional_tail_kernel(2, 0.5), g, BoundaryMode::conservative,
                                              Strategy::on_the_fly);
    CHECK_THROWS_AS(op.apply(Field(build_grid(2, 4.0, 8))), InvalidArgument);
}
