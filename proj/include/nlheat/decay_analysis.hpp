#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nlheat/functionals.hpp"
#include "nlheat/integrator.hpp"
#include "nlheat/kernels.hpp"

namespace nlheat {

/// Predicted L^q decay rate: n/(2 sigma) (1 - 1/q) for a fractional tail,
/// n/2 (1 - 1/q) when sigma is absent (compactly supported kernel).
double theoretical_exponent(int n, std::optional<double> sigma, double q);

struct DecayRow {
    double t = 0.0;
    double mass = 0.0;
    double l1 = 0.0;
    double linf = 0.0;
    std::vector<double> lq;                       // one per q_list entry
    double energy_q2 = std::numeric_limits<double>::quiet_NaN();  // NaN when not recorded
};

struct DecaySeries {
    std::vector<double> q_list;
    std::vector<DecayRow> rows;
    // Metadata for the theoretical comparison; sigma empty for compact kernels.
    int dimension = 0;
    std::optional<double> sigma;
    std::string kernel_family;

    // Norm column for q (q_list entry, 1 or kInfinity).
    std::vector<double> column(double q) const;
};

// energy_q2 is filled only when op is non-null and conservative.
DecaySeries record(const Trajectory& trajectory, const OperatorApplier* op, const std::vector<double>& q_list);

struct DecayFit {
    double q = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    std::size_t points = 0;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double theoretical_exponent = std::numeric_limits<double>::quiet_NaN();
    double relative_error = std::numeric_limits<double>::quiet_NaN();
};

/**
 * Least-squares line through (log t, log ||u||_q) over the last
 * window_fraction of the series' log-time span.
 */
DecayFit fit_decay(const DecaySeries& series, double q, double window_fraction);

struct SymbolFit {
    double sigma_estimate = 0.0;
    double amplitude_estimate = 0.0;
    double xi_lo = 0.0;
    double xi_hi = 0.0;
};

// 1 - K_hat(xi e_1) for the lattice-sampled kernel, normalized by lattice mass.
double symbol_deficit(const KernelSpec& spec, const Grid& grid, double xi);

/// Fits 1 - K_hat(xi) ~ A |xi|^{2 sigma} over the lowest decade of the grid's
/// frequency lattice xi_m = pi m / L, m = 1..10.
SymbolFit symbol_exponent_fit(const KernelSpec& spec, const Grid& grid);

struct DecayVerdict {
    bool pass = false;
    std::string details;
};

inline constexpr double kMinRSquared = 0.98;

DecayVerdict verify_decay(const DecayFit& fit, double tolerance);

}  // namespace nlheat
