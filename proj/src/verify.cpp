#include "nlheat/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "nlheat/config.hpp"
#include "nlheat/decay_analysis.hpp"
#include "nlheat/errors.hpp"
#include "nlheat/experiment.hpp"
#include "nlheat/functionals.hpp"
#include "nlheat/integrator.hpp"
#include "nlheat/kernels.hpp"

namespace nlheat {

namespace {

CheckResult make_check(const std::string& suite, const std::string& name, bool pass, double margin,
                       const std::string& details) {
    return CheckResult{suite, name, pass, margin, details};
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string q_label(double q) { return "q=" + format_real(q); }

TestProfile profile_for(std::size_t k) { return static_cast<TestProfile>(k % 3); }

Field boundary_clean_field(const Grid& grid, std::size_t k) {
    return random_test_field(grid, 1000 + k, profile_for(k));
}

}  // namespace

std::string to_string(VerifySelector selector) {
    switch (selector) {
        case VerifySelector::all: return "all";
        case VerifySelector::inequalities: return "inequalities";
        case VerifySelector::dynamics: return "dynamics";
        case VerifySelector::decay: return "decay";
    }
    return "unknown";
}

VerifySelector parse_verify_selector(const std::string& name) {
    if (name == "all") return VerifySelector::all;
    if (name == "inequalities") return VerifySelector::inequalities;
    if (name == "dynamics") return VerifySelector::dynamics;
    if (name == "decay") return VerifySelector::decay;
    throw InvalidArgument("unknown selector '" + name + "' (expected all, inequalities, dynamics or decay)");
}

std::vector<CheckResult> check_pairing(const std::vector<double>& q_values, std::size_t pairs, std::uint64_t seed) {
    std::vector<CheckResult> out;
    for (double q : q_values) {
        const PairingConstant c = pairing_constant(q);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> value(-10.0, 10.0);
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < pairs; ++k) {
            const double a = value(rng);
            const double b = value(rng);
            const double scale = std::pow(std::max(std::abs(a), std::abs(b)), q);
            worst = std::min(worst, pairing_check(a, b, q, c) / scale);
        }
        // Contract: margin >= -1e-12 max(|a|,|b|)^q.
        const double margin = worst + 1e-12;
        std::string details = "worst scaled margin " + fmt(worst) + " over " + std::to_string(pairs) +
                              " pairs, C=" + fmt(c.constant) + " (" + to_string(c.method) + ")";
        bool pass = margin >= 0.0;
        if (q == 2.0 && c.constant != 1.0) {
            pass = false;
            details += "; C_2 must be exactly 1";
        }
        if (q >= 2.0 && c.constant < std::pow(2.0, -q)) {
            pass = false;
            details += "; C below 2^-q";
        }
        out.push_back(make_check("inequalities", "pairing " + q_label(q), pass, margin, details));
    }
    return out;
}

std::vector<CheckResult> check_mollifier_bounds(const Grid& grid, std::size_t fields,
                                                const std::vector<double>& q_values) {
    const MollifierSpec psi = build_mollifier(grid, 1.0);
    constexpr double kSlack = 1e-10;
    std::vector<double> worst_v(q_values.size(), std::numeric_limits<double>::infinity());
    std::vector<double> worst_w(q_values.size(), std::numeric_limits<double>::infinity());
    bool truncated = false;
    for (std::size_t k = 0; k < fields; ++k) {
        const Field u = boundary_clean_field(grid, k);
        const Decomposition d = mollifier_decompose(u, psi);
        truncated = truncated || d.truncated;
        for (std::size_t iq = 0; iq < q_values.size(); ++iq) {
            const double q = q_values[iq];
            const double nu = lq_norm(u, q);
            // Margins in units of ||u||_q.
            worst_v[iq] = std::min(worst_v[iq], (nu - lq_norm(d.smooth_part, q)) / nu);
            worst_w[iq] = std::min(worst_w[iq], (2.0 * nu - lq_norm(d.remainder, q)) / nu);
        }
    }
    std::vector<CheckResult> out;
    for (std::size_t iq = 0; iq < q_values.size(); ++iq) {
        const std::string tag = " " + q_label(q_values[iq]);
        const std::string suffix = " (units of ||u||_q, " + std::to_string(fields) + " fields" +
                                   (truncated ? ", TRUNCATED" : "") + ")";
        out.push_back(make_check("inequalities", "mollifier ||v||_q <= ||u||_q" + tag,
                                 !truncated && worst_v[iq] >= -kSlack, worst_v[iq] + kSlack,
                                 "min (||u|| - ||v||) " + fmt(worst_v[iq]) + suffix));
        out.push_back(make_check("inequalities", "mollifier ||w||_q <= 2||u||_q" + tag,
                                 !truncated && worst_w[iq] >= -kSlack, worst_w[iq] + kSlack,
                                 "min (2||u|| - ||w||) " + fmt(worst_w[iq]) + suffix));
    }
    return out;
}

std::vector<CheckResult> check_keyprop_stability(const Grid& grid_lo, const Grid& grid_hi, std::size_t fields) {
    const KernelSpec spec = fractional_tail_kernel(2, 0.5);
    const auto op_lo = OperatorApplier::assemble(spec, grid_lo, BoundaryMode::conservative, Strategy::fft_convolution);
    const auto op_hi = OperatorApplier::assemble(spec, grid_hi, BoundaryMode::conservative, Strategy::fft_convolution);
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    double worst_change = 1.0;
    for (std::size_t k = 0; k < fields; ++k) {
        const double r_hi = keyprop_ratio(boundary_clean_field(grid_hi, k), op_hi, 0.5, 2.0);
        const double r_lo = keyprop_ratio(boundary_clean_field(grid_lo, k), op_lo, 0.5, 2.0);
        lo = std::min(lo, r_hi);
        hi = std::max(hi, r_hi);
        worst_change = std::max(worst_change, std::max(r_hi / r_lo, r_lo / r_hi));
    }
    const double spread = hi / lo;
    std::vector<CheckResult> out;
    out.push_back(make_check("inequalities", "keyprop ratio spread", spread <= 10.0, 10.0 - spread,
                             "max/min " + fmt(spread) + " over " + std::to_string(fields) + " fields, ratios in [" +
                                 fmt(lo) + ", " + fmt(hi) + "], limit 10"));
    out.push_back(make_check("inequalities", "keyprop ratio refinement", worst_change <= 2.0, 2.0 - worst_change,
                             "worst per-field change " + fmt(worst_change) + "x under M " +
                                 std::to_string(grid_lo.points_per_axis()) + " -> " +
                                 std::to_string(grid_hi.points_per_axis()) + ", limit 2"));
    return out;
}

CheckResult check_sobolev_stability(const Grid& grid_lo, const Grid& grid_hi) {
    const double r_lo = sobolev_ratio(random_test_field(grid_lo, 7, TestProfile::gaussian_bump), 0.5, 2.0);
    const double r_hi = sobolev_ratio(random_test_field(grid_hi, 7, TestProfile::gaussian_bump), 0.5, 2.0);
    const double change = std::max(r_hi / r_lo, r_lo / r_hi);
    return make_check("inequalities", "sobolev ratio refinement", change <= 2.0, 2.0 - change,
                      "ratio " + fmt(r_lo) + " -> " + fmt(r_hi) + " (s=1/2, q=2, q*=4), change " + fmt(change) +
                          "x, limit 2");
}

CheckResult check_lemma41_spread(const Grid& grid, std::size_t fields) {
    const auto op = OperatorApplier::assemble(fractional_tail_kernel(grid.dimension(), 0.5), grid,
                                              BoundaryMode::conservative, Strategy::fft_convolution);
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t k = 0; k < fields; ++k) {
        const Field u = random_test_field(grid, 2000 + k, TestProfile::gaussian_bump);
        const double c = lemma41_check(u, u, op, 2.0, 0.5).constant;
        lo = std::min(lo, c);
        hi = std::max(hi, c);
    }
    const double spread = hi / lo;
    return make_check("inequalities", "interpolation constant spread", spread <= 2.0, 2.0 - spread,
                      "constants in [" + fmt(lo) + ", " + fmt(hi) + "] over " + std::to_string(fields) +
                          " gaussian bumps, limit 2");
}

std::vector<CheckResult> check_interpolation(std::size_t triples, std::uint64_t seed) {
    std::vector<CheckResult> out;
    const auto e = interpolation_exponents(2, 2.0, 0.5);
    const bool exact = e.theta == 2.0 / 3.0 && e.q_star == 4.0;
    out.push_back(make_check("inequalities", "theta(2,2,1/2)", exact, exact ? 0.0 : -1.0,
                             "theta=" + format_real(e.theta) + ", q*=" + format_real(e.q_star) +
                                 ", expected 2/3 and 4 exactly"));

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dim(1, 3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (std::size_t k = 0; k < triples; ++k) {
        const int n = dim(rng);
        // sigma in (0, min(1, n/2)) keeps n > 2 sigma.
        const double sigma = std::min(1.0, 0.5 * n) * (0.001 + 0.998 * unit(rng));
        const double q = 1.0 + 1e-3 + 19.0 * unit(rng);
        const auto ex = interpolation_exponents(n, q, sigma);
        worst = std::max(worst, std::abs(1.0 / q - (ex.theta / ex.q_star + (1.0 - ex.theta))));
    }
    out.push_back(make_check("inequalities", "theta identity", worst <= 1e-12, 1e-12 - worst,
                             "max |1/q - theta/q* - (1 - theta)| = " + fmt(worst) + " over " +
                                 std::to_string(triples) + " triples, limit 1e-12"));
    return out;
}

std::vector<CheckResult> check_conservation_contraction(const Grid& grid, Strategy strategy, std::size_t steps) {
    const KernelSpec spec = normalize_mass(fractional_tail_kernel(grid.dimension(), 0.5), 1.0);
    const auto op = OperatorApplier::assemble(spec, grid, BoundaryMode::conservative, strategy);
    const double dt = max_stable_dt(op, Scheme::euler, 0.9);

    ExperimentConfig datum_cfg;
    datum_cfg.datum_width = std::min(2.0, grid.half_width() / 4.0);
    const Field positive = initial_datum(datum_cfg, grid);
    const Field signed_field = random_test_field(grid, 3, TestProfile::random_modes);

    const std::vector<double> qs{1.0, 1.5, 2.0, 3.0, 4.0, kInfinity};
    std::vector<CheckResult> out;
    for (int pass = 0; pass < 2; ++pass) {
        const bool is_positive = pass == 0;
        Field u = is_positive ? positive : signed_field;
        const std::string tag = is_positive ? " (nonnegative datum)" : " (signed datum)";
        const double m0 = total_mass(u);
        const double l1_0 = lq_norm(u, 1.0);
        std::vector<double> prev;
        for (double q : qs) prev.push_back(lq_norm(u, q));
        const std::vector<double> first = prev;
        std::vector<double> worst_rise(qs.size(), 0.0);
        double worst_drift = 0.0;
        double min_value = *std::min_element(u.values().begin(), u.values().end());
        for (std::size_t s = 0; s < steps; ++s) {
            u = step(op, u, dt, Scheme::euler);
            worst_drift = std::max(worst_drift, std::abs(total_mass(u) - m0) / l1_0);
            for (std::size_t iq = 0; iq < qs.size(); ++iq) {
                const double now = lq_norm(u, qs[iq]);
                worst_rise[iq] = std::max(worst_rise[iq], (now - prev[iq]) / first[iq]);
                prev[iq] = now;
            }
            min_value = std::min(min_value, *std::min_element(u.values().begin(), u.values().end()));
        }
        const std::string run = std::to_string(steps) + " euler steps on " + std::to_string(grid.points_per_axis()) +
                                "^" + std::to_string(grid.dimension()) + " " + to_string(strategy);
        out.push_back(make_check("dynamics", "mass conservation" + tag, worst_drift <= 1e-10, 1e-10 - worst_drift,
                                 "max relative drift " + fmt(worst_drift) + " over " + run + ", limit 1e-10"));
        for (std::size_t iq = 0; iq < qs.size(); ++iq) {
            const std::string name = qs[iq] == kInfinity ? "linf" : "l" + format_real(qs[iq]);
            out.push_back(make_check("dynamics", name + " nonincreasing" + tag, worst_rise[iq] <= 1e-12,
                                     1e-12 - worst_rise[iq],
                                     "max step-to-step rise " + fmt(worst_rise[iq]) + " (relative), slack 1e-12"));
        }
        if (is_positive) {
            out.push_back(make_check("dynamics", "positivity", min_value >= 0.0, min_value,
                                     "min value " + fmt(min_value) + " over " + run + ", must be >= 0 exactly"));
        }
    }
    return out;
}

std::vector<CheckResult> check_dissipation_convergence(const Grid& grid, const std::vector<double>& q_values) {
    const KernelSpec spec = normalize_mass(fractional_tail_kernel(grid.dimension(), 0.5), 1.0);
    const auto op = OperatorApplier::assemble(spec, grid, BoundaryMode::conservative, Strategy::dense);
    // A strictly positive datum keeps |u|^(q-2) u smooth in time.
    const Field bump = random_test_field(grid, 11, TestProfile::gaussian_bump);
    const Field u0 = linear_combination(1.0, Field::constant(grid, 1.0), 1.0 / lq_norm(bump, kInfinity), bump);
    constexpr double kCenter = 1.0;
    constexpr double kSpacing = 0.2;

    auto residual = [&](double spacing, double q) {
        TimeSchedule schedule;
        schedule.scheme = Scheme::rk4;
        schedule.dt_safety = 0.5;
        schedule.t_end = kCenter + spacing;
        schedule.sample_times = {kCenter - spacing, kCenter, kCenter + spacing};
        return dissipation_identity_residual(op, evolve(op, u0, schedule), q, 1);
    };

    std::vector<CheckResult> out;
    for (double q : q_values) {
        const double coarse = residual(kSpacing, q);
        const double fine = residual(0.5 * kSpacing, q);
        const double ratio = coarse / fine;
        const double margin = std::min(ratio - 3.5, 4.5 - ratio);
        out.push_back(make_check("dynamics", "dissipation identity " + q_label(q), margin >= 0.0, margin,
                                 "residual " + fmt(coarse) + " -> " + fmt(fine) + " when spacing halves, ratio " +
                                     fmt(ratio) + ", expected in [3.5, 4.5]"));
    }
    return out;
}

CheckResult check_scheme_consistency(const Grid& grid) {
    const KernelSpec spec = normalize_mass(fractional_tail_kernel(grid.dimension(), 0.5), 1.0);
    const auto op = OperatorApplier::assemble(spec, grid, BoundaryMode::conservative, Strategy::dense);
    const Field u0 = random_test_field(grid, 5, TestProfile::double_bump);
    const double dt = max_stable_dt(op, Scheme::euler, 0.5);
    // Fixed step counts so both resolutions land on the same horizon exactly.
    auto gap = [&](std::size_t steps) {
        const double h = 40.0 * dt / static_cast<double>(steps);
        Field e = u0;
        Field r = u0;
        for (std::size_t s = 0; s < steps; ++s) {
            e = step(op, e, h, Scheme::euler);
            r = step(op, r, h, Scheme::rk4);
        }
        return lq_norm(linear_combination(1.0, e, -1.0, r), kInfinity);
    };
    const double g1 = gap(40);
    const double g2 = gap(80);
    const double ratio = g1 / g2;
    const double margin = 0.2 - std::abs(ratio / 2.0 - 1.0);
    return make_check("dynamics", "euler/rk4 consistency", margin >= 0.0, margin,
                      "gap " + fmt(g1) + " -> " + fmt(g2) + " when dt halves, ratio " + fmt(ratio) +
                          ", expected 2 within 20%");
}

std::vector<CheckResult> check_exponent_algebra() {
    std::vector<CheckResult> out;
    const double fat = theoretical_exponent(2, 0.5, 2.0);
    const double compact = theoretical_exponent(2, std::nullopt, 2.0);
    const double l1 = theoretical_exponent(3, 0.3, 1.0);
    const bool exact = fat == 1.0 && compact == 0.5 && l1 == 0.0;
    out.push_back(make_check("decay", "theoretical exponent values", exact, exact ? 0.0 : -1.0,
                             "n=2 sigma=1/2 q=2 -> " + format_real(fat) + ", compact -> " + format_real(compact) +
                                 ", q=1 -> " + format_real(l1)));

    bool monotone = true;
    for (int n = 1; n <= 3; ++n) {
        for (double sigma = 0.05; sigma < 0.96; sigma += 0.05) {
            double prev = theoretical_exponent(n, sigma, 1.0);
            for (double q = 1.25; q <= 10.0; q += 0.25) {
                const double now = theoretical_exponent(n, sigma, q);
                monotone = monotone && now > prev && now < theoretical_exponent(n, sigma - 0.01, q);
                prev = now;
            }
        }
    }
    out.push_back(make_check("decay", "theoretical exponent monotonicity", monotone, monotone ? 0.0 : -1.0,
                             "increasing in q, decreasing in sigma on a parameter lattice"));
    return out;
}

std::vector<CheckResult> check_synthetic_fits() {
    const std::vector<double> times = log_spaced_times(1.0, 20.0, 40);
    auto series_for = [&](double amplitude, double exponent) {
        DecaySeries s;
        s.q_list = {2.0};
        s.dimension = 2;
        s.sigma = 0.5;
        for (double t : times) {
            DecayRow row;
            row.t = t;
            row.lq = {amplitude * std::pow(t, -exponent)};
            s.rows.push_back(row);
        }
        return s;
    };
    double worst = 0.0;
    for (double amplitude : {1.0, 3.0, 1e-4, 250.0}) {
        for (double exponent : {1.0, 0.5, 0.25, 1.7}) {
            const DecayFit f = fit_decay(series_for(amplitude, exponent), 2.0, 0.5);
            worst = std::max({worst, std::abs(f.slope + exponent), std::abs(f.intercept - std::log(amplitude))});
        }
    }
    return {make_check("decay", "synthetic power-law recovery", worst <= 1e-10, 1e-10 - worst,
                       "max slope/intercept error " + fmt(worst) + ", limit 1e-10")};
}

std::vector<CheckResult> check_symbol_fits(std::size_t points_per_axis, double half_width) {
    const Grid grid = build_grid(1, half_width, points_per_axis);
    std::vector<CheckResult> out;
    const SymbolFit fat = symbol_exponent_fit(normalize_mass(fractional_tail_kernel(1, 0.5), 1.0), grid);
    const double fat_margin = std::min(fat.sigma_estimate - 0.45, 0.55 - fat.sigma_estimate);
    out.push_back(make_check("decay", "symbol exponent fractional_tail", fat_margin >= 0.0, fat_margin,
                             "sigma_estimate " + fmt(fat.sigma_estimate) + ", expected [0.45, 0.55]"));
    const SymbolFit bump = symbol_exponent_fit(normalize_mass(compact_smooth_kernel(1), 1.0), grid);
    const double bump_margin = std::min(bump.sigma_estimate - 0.9, 1.1 - bump.sigma_estimate);
    out.push_back(make_check("decay", "symbol exponent compact_smooth", bump_margin >= 0.0, bump_margin,
                             "sigma_estimate " + fmt(bump.sigma_estimate) + ", expected [0.9, 1.1]"));
    return out;
}

std::vector<CheckResult> check_flagship_decay() {
    ExperimentConfig fat_cfg;
    const ExperimentResult fat = simulate(fat_cfg);
    ExperimentConfig compact_cfg;
    compact_cfg.family = KernelFamily::compact_smooth;
    const ExperimentResult compact = simulate(compact_cfg);

    std::vector<CheckResult> out;
    const DecayFit& f = fat.fits.front();
    const DecayVerdict v = fat.verdicts.front();
    out.push_back(make_check("decay", "fat-tail exponent", v.pass, 0.2 - std::abs(f.slope + f.theoretical_exponent),
                             "slope " + fmt(f.slope) + " vs -" + fmt(f.theoretical_exponent) + ": " + v.details));
    const double separation = compact.fits.front().slope - f.slope;
    out.push_back(make_check("decay", "fat/compact separation", separation >= 0.3, separation - 0.3,
                             "compact slope " + fmt(compact.fits.front().slope) + ", fat-tail slope " + fmt(f.slope) +
                                 ", separation " + fmt(separation) + ", limit 0.3"));
    return out;
}

bool VerifyReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

std::string VerifyReport::format() const {
    std::ostringstream out;
    for (const auto& c : checks) {
        out << (c.pass ? "PASS " : "FAIL ") << c.suite << '/' << c.name << " margin=" << fmt(c.margin) << "  "
            << c.details << '\n';
    }
    const auto failed = std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.pass; });
    out << checks.size() - static_cast<std::size_t>(failed) << '/' << checks.size() << " checks passed\n";
    return out.str();
}

VerifyReport verify_suite(VerifySelector selector) {
    VerifyReport report;
    auto add = [&](std::vector<CheckResult> more) {
        for (auto& c : more) report.checks.push_back(std::move(c));
    };
    const bool all = selector == VerifySelector::all;
    if (all || selector == VerifySelector::inequalities) {
        add(check_pairing({1.5, 2.0, 3.0, 4.0}, 100000, 42));
        add(check_mollifier_bounds(build_grid(2, 10.0, 64), 100, {1.0, 1.5, 2.0, 3.0}));
        add(check_keyprop_stability(build_grid(2, 10.0, 64), build_grid(2, 10.0, 128), 50));
        add({check_sobolev_stability(build_grid(2, 10.0, 64), build_grid(2, 10.0, 128))});
        add({check_lemma41_spread(build_grid(2, 10.0, 64), 20)});
        add(check_interpolation(1000, 7));
    }
    if (all || selector == VerifySelector::dynamics) {
        add(check_conservation_contraction(build_grid(2, 10.0, 32), Strategy::dense, 1000));
        add(check_dissipation_convergence(build_grid(2, 8.0, 32), {2.0, 3.0}));
        add({check_scheme_consistency(build_grid(2, 8.0, 32))});
    }
    if (all || selector == VerifySelector::decay) {
        add(check_exponent_algebra());
        add(check_synthetic_fits());
        add(check_symbol_fits(512, 40.0));
        add(check_flagship_decay());
    }
    return report;
}

}  // namespace nlheat
