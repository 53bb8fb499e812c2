#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "nlheat/grid.hpp"
#include "nlheat/integrator.hpp"
#include "nlheat/nonlocal_operator.hpp"

namespace nlheat {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// (sum |u_i|^q h^n)^(1/q); q = kInfinity gives max |u_i|.
double lq_norm(const Field& u, double q);

double total_mass(const Field& u);

// sign(u) |u|^(q-1), the derivative of |u|^q / q; zero at u = 0.
double signed_power(double u, double q);

/**
 * E_{J,q}(u) = sum_i sum_j w_ij |u_j - u_i|^q h^n over ordered pairs.
 * Requires a conservative operator.
 */
double energy(const OperatorApplier& op, const Field& u, double q);

// |d/dt ||u||_q^q + (q/2) sum_ij w_ij (u_j - u_i)(phi(u_j) - phi(u_i)) h^n|
// with the time derivative taken by centered differences at samples[index].
double dissipation_identity_residual(const OperatorApplier& op, const Trajectory& trajectory, double q,
                                     std::size_t index);

// Gagliardo seminorm (sum_{i != j} |u_j - u_i|^q |x_j - x_i|^-(n + q s) h^2n)^(1/q).
double fractional_seminorm(const Field& u, double s, double q);

// Same quantity by the O(N^2) pair loop regardless of q.
double fractional_seminorm_direct(const Field& u, double s, double q);

struct MollifierSpec {
    double radius = 1.0;
    int reach = 0;  // stencil covers offsets |k_d| <= reach
    Grid grid;
    std::vector<double> stencil;  // (2 reach + 1)^n values, row-major

    double at(const std::array<int, 3>& offset) const;
};

MollifierSpec build_mollifier(const Grid& grid, double radius);

struct Decomposition {
    Field smooth_part;  // v = psi * u
    Field remainder;    // w = u - v
    bool truncated = false;  // u was nonzero within one radius of the boundary
};

Decomposition mollifier_decompose(const Field& u, const MollifierSpec& psi);

enum class PairingMethod { exact_q2, appendix_bound, numeric_minimization };

std::string to_string(PairingMethod method);

struct PairingConstant {
    double q = 2.0;
    double constant = 1.0;
    PairingMethod method = PairingMethod::exact_q2;
};

// Smallest ratio (a - b)(phi(a) - phi(b)) / |a - b|^q resolved at 1e-6 from the
// diagonal. For q in (1, 2) the ratio tends to zero as b/a -> 1, so the constant
// certifies pairs with |a - b| >= 1e-6 max(|a|, |b|); closer pairs fall inside
// the 1e-12 scale slack of pairing_check.
PairingConstant pairing_constant(double q);

// (a - b)(phi(a) - phi(b)) - C |a - b|^q
double pairing_check(double a, double b, double q, const PairingConstant& c);

// ([v]_{2 sigma / q, q}^q + ||w||_q^q) / E_{J,q}(u) with a unit-radius mollifier.
double keyprop_ratio(const Field& u, const OperatorApplier& op, double sigma, double q);

// ||u||_{q*}^q / [u]_{s,q}^q with q* = n q / (n - s q).
double sobolev_ratio(const Field& u, double s, double q);

struct InterpolationExponents {
    double theta;
    double q_star;  // n q / (n - 2 sigma)
};

InterpolationExponents interpolation_exponents(int n, double q, double sigma);

struct Lemma41Result {
    double lhs = 0.0;       // ||u||_q^q
    double term1 = 0.0;     // ||u0||_1^{q(1 - theta)} E^theta
    double term2 = 0.0;     // E
    double constant = 0.0;  // lhs / (term1 + term2)
};

Lemma41Result lemma41_check(const Field& u0, const Field& u, const OperatorApplier& op, double q, double sigma);

}  // namespace nlheat
