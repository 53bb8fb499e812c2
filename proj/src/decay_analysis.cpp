#include "nlheat/decay_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nlheat/errors.hpp"

namespace nlheat {

double theoretical_exponent(int n, std::optional<double> sigma, double q) {
    if (!(q >= 1.0)) throw InvalidArgument("theoretical exponent needs q >= 1");
    if (n < 1) throw InvalidArgument("dimension must be positive");
    const double lq_factor = q == kInfinity ? 1.0 : 1.0 - 1.0 / q;
    if (!sigma) return 0.5 * n * lq_factor;
    if (!(*sigma > 0.0 && *sigma < 1.0)) throw InvalidArgument("sigma must lie in (0,1)");
    return n / (2.0 * *sigma) * lq_factor;
}

std::vector<double> DecaySeries::column(double q) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t k = 0; k < q_list.size(); ++k) {
        if (q_list[k] == q) {
            for (const auto& r : rows) out.push_back(r.lq[k]);
            return out;
        }
    }
    if (q == 1.0) {
        for (const auto& r : rows) out.push_back(r.l1);
        return out;
    }
    if (q == kInfinity) {
        for (const auto& r : rows) out.push_back(r.linf);
        return out;
    }
    std::ostringstream msg;
    msg << "series has no column for q = " << q;
    throw InvalidArgument(msg.str());
}

DecaySeries record(const Trajectory& trajectory, const OperatorApplier* op, const std::vector<double>& q_list) {
    if (q_list.empty()) throw InvalidArgument("q_list must not be empty");
    DecaySeries series;
    series.q_list = q_list;
    const bool with_energy = op != nullptr && op->boundary_mode() == BoundaryMode::conservative;
    if (op != nullptr) {
        const KernelSpec& spec = op->spec();
        series.dimension = spec.dimension;
        if (spec.has_fractional_tail()) series.sigma = spec.sigma;
        series.kernel_family = to_string(spec.family);
    }
    for (const auto& snap : trajectory.samples) {
        DecayRow row;
        row.t = snap.t;
        row.mass = total_mass(snap.field);
        row.l1 = lq_norm(snap.field, 1.0);
        row.linf = lq_norm(snap.field, kInfinity);
        for (double q : q_list) row.lq.push_back(lq_norm(snap.field, q));
        if (with_energy) row.energy_q2 = energy(*op, snap.field, 2.0);
        series.rows.push_back(std::move(row));
    }
    if (!trajectory.samples.empty() && series.dimension == 0) {
        series.dimension = trajectory.samples.front().field.grid().dimension();
    }
    return series;
}

DecayFit fit_decay(const DecaySeries& series, double q, double window_fraction) {
    if (!(window_fraction > 0.0 && window_fraction < 1.0)) {
        throw InvalidArgument("window_fraction must lie in (0,1)");
    }
    if (series.rows.empty()) throw InvalidArgument("cannot fit an empty series");
    const std::vector<double> norms = series.column(q);
    const double t_first = series.rows.front().t;
    const double t_end = series.rows.back().t;
    if (!(t_first > 0.0)) throw InvalidArgument("decay fit needs positive sample times");
    const double log_lo = std::log(t_end) - window_fraction * (std::log(t_end) - std::log(t_first));
    const double t_lo = std::exp(log_lo);

    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t k = 0; k < series.rows.size(); ++k) {
        const double t = series.rows[k].t;
        if (t < t_lo * (1.0 - 1e-12)) continue;
        if (!(norms[k] > 0.0)) {
            std::ostringstream msg;
            msg << "nonpositive norm " << norms[k] << " at t = " << t << " inside the fit window";
            throw NumericalError(msg.str());
        }
        xs.push_back(std::log(t));
        ys.push_back(std::log(norms[k]));
    }
    if (xs.size() < 5) {
        std::ostringstream msg;
        msg << "fit window [" << t_lo << ", " << t_end << "] holds " << xs.size() << " samples; need at least 5";
        throw InvalidArgument(msg.str());
    }

    const double n = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        mx += xs[k];
        my += ys[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
        syy += (ys[k] - my) * (ys[k] - my);
    }
    DecayFit fit;
    fit.q = q;
    fit.t_lo = std::exp(xs.front());
    fit.t_hi = t_end;
    fit.points = xs.size();
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double r = ys[k] - (fit.intercept + fit.slope * xs[k]);
        ss_res += r * r;
    }
    // A flat series is fit perfectly.
    fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
    if (series.dimension > 0) {
        fit.theoretical_exponent = theoretical_exponent(series.dimension, series.sigma, q);
        if (fit.theoretical_exponent != 0.0) {
            fit.relative_error = std::abs(fit.slope + fit.theoretical_exponent) / fit.theoretical_exponent;
        }
    }
    return fit;
}

namespace {

void require_unit_mass(const KernelSpec& spec) {
    if (!spec.is_convolution()) throw UnsupportedOperation("symbol fit needs a convolution kernel");
    const double mass = kernel_mass(spec);
    if (std::abs(mass - 1.0) > 1e-6) {
        std::ostringstream msg;
        msg << "kernel mass is " << mass << ", not 1; call normalize_mass first";
        throw InvalidArgument(msg.str());
    }
}

}  // namespace

double symbol_deficit(const KernelSpec& spec, const Grid& grid, double xi) {
    if (!spec.is_convolution()) throw UnsupportedOperation("symbol needs a convolution kernel");
    const double R = exterior_radius(grid);
    auto J = [&](const Point& z) { return evaluate_offset(spec, z); };
    const double remainder = spec.has_fractional_tail() ? exterior_tail_bound(spec, R) : 0.0;
    const double mass = lattice_offset_sum(grid, R, J, true) + remainder;
    if (xi == 0.0) return 0.0;
    // Far-field oscillation averages 1 - cos to 1 beyond R.
    const double moment = lattice_offset_sum(
        grid, R, [&](const Point& z) { return J(z) * (1.0 - std::cos(xi * z[0])); }, false);
    return (moment + remainder) / mass;
}

SymbolFit symbol_exponent_fit(const KernelSpec& spec, const Grid& grid) {
    require_unit_mass(spec);
    constexpr int kFrequencies = 10;
    const double base = std::numbers::pi / grid.half_width();
    std::vector<double> xs;
    std::vector<double> ys;
    for (int m = 1; m <= kFrequencies; ++m) {
        const double xi = base * m;
        const double deficit = symbol_deficit(spec, grid, xi);
        if (!(deficit > 0.0)) throw NumericalError("symbol deficit is not positive at low frequency");
        xs.push_back(std::log(xi));
        ys.push_back(std::log(deficit));
    }
    const double n = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        mx += xs[k];
        my += ys[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
    }
    const double slope = sxy / sxx;
    SymbolFit fit;
    fit.sigma_estimate = 0.5 * slope;
    fit.amplitude_estimate = std::exp(my - slope * mx);
    fit.xi_lo = base;
    fit.xi_hi = base * kFrequencies;
    return fit;
}

DecayVerdict verify_decay(const DecayFit& fit, double tolerance) {
    DecayVerdict v;
    const double gap = std::abs(fit.slope + fit.theoretical_exponent);
    std::ostringstream msg;
    if (!std::isfinite(fit.theoretical_exponent)) {
        v.pass = false;
        msg << "no theoretical exponent attached to the fit";
    } else if (!(gap <= tolerance)) {
        v.pass = false;
        msg << "exponent gap " << gap << " exceeds tolerance " << tolerance;
    } else if (!(fit.r_squared >= kMinRSquared)) {
        v.pass = false;
        msg << "r_squared " << fit.r_squared << " below " << kMinRSquared << " (not a power-law regime)";
    } else {
        v.pass = true;
        msg << "exponent gap " << gap << " within tolerance " << tolerance << ", r_squared " << fit.r_squared;
    }
    v.details = msg.str();
    return v;
}

}  // namespace nlheat
