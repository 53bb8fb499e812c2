#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nlheat/grid.hpp"
#include "nlheat/nonlocal_operator.hpp"

namespace nlheat {

/// One named invariant. margin > 0 means satisfied with room to spare; its
/// unit is stated in details.
struct CheckResult {
    std::string suite;
    std::string name;
    bool pass = false;
    double margin = 0.0;
    std::string details;
};

enum class VerifySelector { all, inequalities, dynamics, decay };

std::string to_string(VerifySelector selector);
VerifySelector parse_verify_selector(const std::string& name);

// Inequality checks.
std::vector<CheckResult> check_pairing(const std::vector<double>& q_values, std::size_t pairs, std::uint64_t seed);
std::vector<CheckResult> check_mollifier_bounds(const Grid& grid, std::size_t fields,
                                                const std::vector<double>& q_values);
// keyprop_ratio spread on grid_hi and per-field change between grid_lo and grid_hi.
std::vector<CheckResult> check_keyprop_stability(const Grid& grid_lo, const Grid& grid_hi, std::size_t fields);
CheckResult check_sobolev_stability(const Grid& grid_lo, const Grid& grid_hi);
CheckResult check_lemma41_spread(const Grid& grid, std::size_t fields);
std::vector<CheckResult> check_interpolation(std::size_t triples, std::uint64_t seed);

// Dynamics checks.
std::vector<CheckResult> check_conservation_contraction(const Grid& grid, Strategy strategy, std::size_t steps);
std::vector<CheckResult> check_dissipation_convergence(const Grid& grid, const std::vector<double>& q_values);
CheckResult check_scheme_consistency(const Grid& grid);

// Decay checks.
std::vector<CheckResult> check_exponent_algebra();
std::vector<CheckResult> check_synthetic_fits();
std::vector<CheckResult> check_symbol_fits(std::size_t points_per_axis, double half_width);
std::vector<CheckResult> check_flagship_decay();

struct VerifyReport {
    std::vector<CheckResult> checks;

    bool passed() const;
    // One line per check: PASS|FAIL suite/name margin=<m> <details>
    std::string format() const;
};

VerifyReport verify_suite(VerifySelector selector);

}  // namespace nlheat
