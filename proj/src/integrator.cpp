#include "nlheat/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nlheat/errors.hpp"

namespace nlheat {

std::string to_string(Scheme scheme) { return scheme == Scheme::euler ? "euler" : "rk4"; }

Scheme parse_scheme(const std::string& name) {
    if (name == "euler") return Scheme::euler;
    if (name == "rk4") return Scheme::rk4;
    throw InvalidArgument("unknown time scheme '" + name + "'");
}

void TimeSchedule::validate() const {
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw InvalidArgument("t_end must be positive");
    if (!(dt_safety > 0.0 && dt_safety <= 1.0)) throw InvalidArgument("dt_safety must lie in (0,1]");
    double prev = 0.0;
    for (double t : sample_times) {
        if (!(t > prev)) throw InvalidArgument("sample times must be strictly ascending and positive");
        if (t > t_end) throw InvalidArgument("sample times must not exceed t_end");
        prev = t;
    }
}

std::vector<double> log_spaced_times(double t_first, double t_end, std::size_t count) {
    if (count == 0) return {};
    if (!(t_first > 0.0 && t_first <= t_end)) throw InvalidArgument("log spacing needs 0 < t_first <= t_end");
    if (count == 1) return {t_end};
    std::vector<double> out(count);
    const double a = std::log(t_first);
    const double b = std::log(t_end);
    for (std::size_t k = 0; k < count; ++k) {
        out[k] = std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(count - 1));
    }
    out.front() = t_first;
    out.back() = t_end;
    return out;
}

std::vector<double> uniform_times(double t_first, double t_end, std::size_t count) {
    if (count == 0) return {};
    if (count == 1) return {t_end};
    std::vector<double> out(count);
    for (std::size_t k = 0; k < count; ++k) {
        out[k] = t_first + (t_end - t_first) * static_cast<double>(k) / static_cast<double>(count - 1);
    }
    out.back() = t_end;
    return out;
}

double max_stable_dt(const OperatorApplier& op, Scheme /*scheme*/, double dt_safety) {
    if (!(dt_safety > 0.0 && dt_safety <= 1.0)) throw InvalidArgument("dt_safety must lie in (0,1]");
    const auto d = op.row_sums().values();
    const double d_max = d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());
    if (!(d_max > 0.0)) throw NumericalError("all row sums vanish: degenerate kernel");
    return dt_safety / d_max;
}

namespace {

void require_finite(const std::vector<double>& v, double t) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            std::ostringstream msg;
            msg << "instability: non-finite values at t = " << t;
            throw NumericalError(msg.str());
        }
    }
}

// u + a * k
std::vector<double> axpy(std::span<const double> u, double a, std::span<const double> k) {
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = u[i] + a * k[i];
    return out;
}

std::vector<double> step_values(const OperatorApplier& op, const Field& u, double dt, Scheme scheme) {
    const Grid& grid = u.grid();
    const Field k1 = op.apply(u);
    if (scheme == Scheme::euler) return axpy(u.values(), dt, k1.values());

    const Field k2 = op.apply(Field(grid, axpy(u.values(), 0.5 * dt, k1.values())));
    const Field k3 = op.apply(Field(grid, axpy(u.values(), 0.5 * dt, k2.values())));
    const Field k4 = op.apply(Field(grid, axpy(u.values(), dt, k3.values())));
    std::vector<double> out(u.size());
    const double w = dt / 6.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = u[i] + w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return out;
}

}  // namespace

Field step(const OperatorApplier& op, const Field& u, double dt, Scheme scheme) {
    if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
    std::vector<double> out = step_values(op, u, dt, scheme);
    require_finite(out, dt);
    return Field(u.grid(), std::move(out));
}

Trajectory evolve(const OperatorApplier& op, const Field& u0, const TimeSchedule& schedule) {
    schedule.validate();
    if (!(u0.grid() == op.grid())) throw InvalidArgument("initial datum grid does not match operator grid");
    const double dt = max_stable_dt(op, schedule.scheme, schedule.dt_safety);

    Trajectory traj;
    traj.samples.reserve(schedule.sample_times.size());
    Field u = u0;
    double t = 0.0;
    for (double target : schedule.sample_times) {
        while (t < target) {
            double h = dt;
            // Land exactly on the sample; avoid a sliver step just before it.
            if (t + h >= target * (1.0 - 1e-12)) h = target - t;
            std::vector<double> next = step_values(op, u, h, schedule.scheme);
            const double t_next = (h == target - t) ? target : t + h;
            require_finite(next, t_next);
            u = Field(u.grid(), std::move(next));
            t = t_next;
        }
        traj.samples.push_back(Snapshot{t, u});
    }
    return traj;
}

}  // namespace nlheat
