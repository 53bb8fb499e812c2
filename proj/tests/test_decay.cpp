#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "nlheat/decay_analysis.hpp"
#include "nlheat/errors.hpp"

using namespace nlheat;

namespace {

DecaySeries synthetic(double amplitude, double exponent, std::size_t count, double t0 = 1.0, double t1 = 100.0) {
    DecaySeries s;
    s.q_list = {2.0};
    for (double t : log_spaced_times(t0, t1, count)) {
        DecayRow row;
        row.t = t;
        row.mass = 1.0;
        row.l1 = 1.0;
        row.linf = amplitude * std::pow(t, -2.0 * exponent);
        row.lq = {amplitude * std::pow(t, -exponent)};
        s.rows.push_back(row);
    }
    return s;
}

DecayFit fit_with(double slope, double theory, double r2) {
    DecayFit f;
    f.q = 2.0;
    f.slope = slope;
    f.theoretical_exponent = theory;
    f.r_squared = r2;
    return f;
}

}  // namespace

TEST_CASE("theoretical exponent") {
    CHECK(theoretical_exponent(2, 0.5, 2.0) == 1.0);
    CHECK(theoretical_exponent(2, std::nullopt, 2.0) == 0.5);
    for (int n : {1, 2, 3}) {
        CHECK(theoretical_exponent(n, 0.3, 1.0) == 0.0);
        CHECK(theoretical_exponent(n, std::nullopt, 1.0) == 0.0);
    }
    CHECK(theoretical_exponent(3, 0.75, 4.0) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK_THROWS_AS(theoretical_exponent(2, 0.5, 0.5), InvalidArgument);
    CHECK_THROWS_AS(theoretical_exponent(2, 1.0, 2.0), InvalidArgument);
    CHECK_THROWS_AS(theoretical_exponent(2, 0.0, 2.0), InvalidArgument);
}

TEST_CASE("theoretical exponent monotonicity") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        const int n = 1 + k % 3;
        const double sigma = 0.01 + 0.97 * unit(rng);
        const double q = 1.001 + 20.0 * unit(rng);
        const double dq = 0.01 + unit(rng);
        const double ds = 0.01 * (1.0 - sigma);
        CHECK(theoretical_exponent(n, sigma, q + dq) > theoretical_exponent(n, sigma, q));
        CHECK(theoretical_exponent(n, sigma + ds, q) < theoretical_exponent(n, sigma, q));
        // The range q in (1, 2 sigma] uses the same formula.
        const double q_small = 1.0 + (2.0 * sigma - 1.0 > 0.0 ? (2.0 * sigma - 1.0) * unit(rng) : 0.0);
        CHECK(theoretical_exponent(n, sigma, q_small) == doctest::Approx(n / (2.0 * sigma) * (1.0 - 1.0 / q_small)));
    }
}

TEST_CASE("record") {
    const Grid g = build_grid(2, 4.0, 12);
    const auto op = OperatorApplier::assemble(fractional_tail_kernel(2, 0.5), g, BoundaryMode::conservative,
                                              Strategy::dense);
    const auto absorbing = OperatorApplier::assemble(fractional_tail_kernel(2, 0.5), g, BoundaryMode::absorbing,
                                                     Strategy::dense);
    TimeSchedule s;
    s.t_end = 4.0;
    s.sample_times = log_spaced_times(0.5, 4.0, 8);

    const Trajectory zero = evolve(op, Field(g), s);
    const DecaySeries zs = record(zero, &op, {1.5, 2.0});
    REQUIRE(zs.rows.size() == 8);
    for (const DecayRow& r : zs.rows) {
        CHECK(r.mass == 0.0);
        CHECK(r.l1 == 0.0);
        CHECK(r.linf == 0.0);
        CHECK(r.lq == std::vector<double>{0.0, 0.0});
        CHECK(r.energy_q2 == 0.0);
    }
    CHECK_THROWS_AS(record(zero, &op, {}), InvalidArgument);

    std::vector<double> bump(g.cell_count());
    for (std::size_t i = 0; i < bump.size(); ++i) bump[i] = std::exp(-0.5 * std::pow(norm(g.center(i)), 2));
    const Field u0(g, bump);
    const DecaySeries cs = record(evolve(op, u0, s), &op, {2.0, 3.0});
    CHECK(cs.dimension == 2);
    for (std::size_t k = 1; k < cs.rows.size(); ++k) {
        CHECK(cs.rows[k].mass == doctest::Approx(cs.rows[0].mass).epsilon(1e-12));
        CHECK(cs.rows[k].l1 <= cs.rows[k - 1].l1 * (1.0 + 1e-12));
        CHECK(cs.rows[k].linf <= cs.rows[k - 1].linf * (1.0 + 1e-12));
        CHECK(cs.rows[k].lq[0] <= cs.rows[k - 1].lq[0] * (1.0 + 1e-12));
        CHECK(cs.rows[k].lq[1] <= cs.rows[k - 1].lq[1] * (1.0 + 1e-12));
        CHECK(std::isfinite(cs.rows[k].energy_q2));
    }
    const DecaySeries as = record(evolve(absorbing, u0, s), &absorbing, {2.0});
    for (std::size_t k = 1; k < as.rows.size(); ++k) {
        CHECK(as.rows[k].mass < as.rows[k - 1].mass);
        CHECK(std::isnan(as.rows[k].energy_q2));
    }
    CHECK(std::isnan(record(evolve(op, u0, s), nullptr, {2.0}).rows[0].energy_q2));
    CHECK(cs.column(3.0) == std::vector<double>{cs.rows[0].lq[1], cs.rows[1].lq[1], cs.rows[2].lq[1], cs.rows[3].lq[1],
                                                cs.rows[4].lq[1], cs.rows[5].lq[1], cs.rows[6].lq[1], cs.rows[7].lq[1]});
    CHECK_THROWS_AS(cs.column(5.0), InvalidArgument);
}

TEST_CASE("fit_decay on exact power laws") {
    const DecayFit unit = fit_decay(synthetic(1.0, 1.0, 20), 2.0, 0.5);
    CHECK(std::abs(unit.slope + 1.0) <= 1e-12);
    CHECK(std::abs(unit.intercept) <= 1e-12);
    CHECK(unit.r_squared == doctest::Approx(1.0).epsilon(1e-12));

    const DecayFit three = fit_decay(synthetic(3.0, 0.5, 20), 2.0, 0.5);
    CHECK(three.slope == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(three.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unitd(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const double a = std::exp(10.0 * (unitd(rng) - 0.5));
        const double p = 3.0 * unitd(rng);
        const double w = 0.2 + 0.7 * unitd(rng);
        const DecayFit base = fit_decay(synthetic(1.0, p, 40), 2.0, w);
        const DecayFit f = fit_decay(synthetic(a, p, 40), 2.0, w);
        CHECK(std::abs(f.slope + p) <= 1e-10);
        CHECK(std::abs(f.intercept - std::log(a)) <= 1e-10);
        CHECK(std::abs(f.slope - base.slope) <= 1e-10);
        CHECK(std::abs(f.intercept - base.intercept - std::log(a)) <= 1e-10);
        const DecayFit inf = fit_decay(synthetic(a, p, 40), kInfinity, w);
        CHECK(std::abs(inf.slope + 2.0 * p) <= 1e-10);
    }
}

TEST_CASE("fit_decay window and metadata") {
    DecaySeries s = synthetic(1.0, 1.0, 21, 1.0, 100.0);
    const DecayFit f = fit_decay(s, 2.0, 0.5);
    CHECK(f.t_lo == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(f.t_hi == 100.0);
    CHECK(f.points == 11);
    CHECK(std::isnan(f.theoretical_exponent));

    s.dimension = 2;
    s.sigma = 0.5;
    const DecayFit g = fit_decay(s, 2.0, 0.5);
    CHECK(g.theoretical_exponent == 1.0);
    CHECK(g.relative_error <= 1e-12);
    s.sigma.reset();
    const DecayFit c = fit_decay(s, 2.0, 0.5);
    CHECK(c.theoretical_exponent == 0.5);
    CHECK(c.relative_error == doctest::Approx(1.0).epsilon(1e-10));
    const DecayFit l1 = fit_decay(s, 1.0, 0.5);
    CHECK(l1.theoretical_exponent == 0.0);
    CHECK(std::isnan(l1.relative_error));
}

TEST_CASE("fit_decay errors") {
    CHECK_THROWS_AS(fit_decay(synthetic(1.0, 1.0, 8), 2.0, 0.5), InvalidArgument);
    CHECK_NOTHROW(fit_decay(synthetic(1.0, 1.0, 9), 2.0, 0.5));
    DecaySeries s = synthetic(1.0, 1.0, 20);
    s.rows.back().lq[0] = 0.0;
    CHECK_THROWS_AS(fit_decay(s, 2.0, 0.5), NumericalError);
    s.rows.back().lq[0] = -1.0;
    CHECK_THROWS_AS(fit_decay(s, 2.0, 0.5), NumericalError);
    // A zero outside the window is ignored.
    DecaySeries early = synthetic(1.0, 1.0, 20);
    early.rows.front().lq[0] = 0.0;
    CHECK_NOTHROW(fit_decay(early, 2.0, 0.5));
    CHECK_THROWS_AS(fit_decay(synthetic(1.0, 1.0, 20), 2.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(fit_decay(synthetic(1.0, 1.0, 20), 2.0, 0.0), InvalidArgument);
    CHECK_THROWS_AS(fit_decay(DecaySeries{}, 2.0, 0.5), InvalidArgument);
}

TEST_CASE("symbol deficit against a direct lattice sum") {
    const Grid g = build_grid(1, 40.0, 512);
    const KernelSpec spec = normalize_mass(fractional_tail_kernel(1, 0.5), 1.0);
    CHECK(symbol_deficit(spec, g, 0.0) == 0.0);
    const double h = g.spacing();
    // Plain sum over a lattice long enough that the neglected tail is below 1e-5.
    const long reach = static_cast<long>(2e5 / h);
    double mass = 0.0;
    for (long k = -reach; k <= reach; ++k) mass += evaluate_offset(spec, {k * h, 0.0, 0.0}) * h;
    for (int m : {1, 3, 10}) {
        const double xi = std::numbers::pi * m / g.half_width();
        double moment = 0.0;
        for (long k = -reach; k <= reach; ++k) {
            moment += evaluate_offset(spec, {k * h, 0.0, 0.0}) * (1.0 - std::cos(xi * k * h)) * h;
        }
        CHECK(symbol_deficit(spec, g, xi) == doctest::Approx(moment / mass).epsilon(2e-3));
    }
}

TEST_CASE("symbol exponent fits") {
    const Grid g = build_grid(1, 40.0, 512);
    const SymbolFit frac = symbol_exponent_fit(normalize_mass(fractional_tail_kernel(1, 0.5), 1.0), g);
    CHECK(frac.sigma_estimate >= 0.45);
    CHECK(frac.sigma_estimate <= 0.55);
    CHECK(frac.amplitude_estimate > 0.0);
    CHECK(frac.xi_lo == doctest::Approx(std::numbers::pi / 40.0));
    CHECK(frac.xi_hi == doctest::Approx(10.0 * std::numbers::pi / 40.0));

    const SymbolFit compact = symbol_exponent_fit(normalize_mass(compact_smooth_kernel(1, 1.0), 1.0), g);
    CHECK(compact.sigma_estimate >= 0.9);
    CHECK(compact.sigma_estimate <= 1.1);

    CHECK_THROWS_AS(symbol_exponent_fit(fractional_tail_kernel(1, 0.5, 2.0, 2.0), g), InvalidArgument);
    CHECK_THROWS_AS(symbol_exponent_fit(nonconvolution_kernel(1, 0.5, 0.3), g), UnsupportedOperation);
}

TEST_CASE("verify_decay") {
    const DecayFit exact = fit_decay(synthetic(1.0, 1.0, 20), 2.0, 0.5);
    DecayFit with_theory = exact;
    with_theory.theoretical_exponent = 1.0;
    CHECK(verify_decay(with_theory, 0.01).pass);

    const DecayVerdict gap = verify_decay(fit_with(-0.5, 1.0, 1.0), 0.2);
    CHECK_FALSE(gap.pass);
    CHECK(gap.details.find("exponent gap 0.5") != std::string::npos);

    const DecayVerdict rough = verify_decay(fit_with(-1.0, 1.0, 0.9), 0.2);
    CHECK_FALSE(rough.pass);
    CHECK(rough.details.find("r_squared") != std::string::npos);

    CHECK(verify_decay(fit_with(-1.2, 1.0, 0.98), 0.2).pass);
    CHECK_FALSE(verify_decay(fit_with(-1.21, 1.0, 0.99), 0.2).pass);
    CHECK_FALSE(verify_decay(exact, 10.0).pass);
}
