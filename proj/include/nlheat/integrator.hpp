#pragma once

#include <string>
#include <vector>

#include "nlheat/grid.hpp"
#include "nlheat/nonlocal_operator.hpp"

namespace nlheat {

enum class Scheme { euler, rk4 };

std::string to_string(Scheme scheme);
Scheme parse_scheme(const std::string& name);

struct TimeSchedule {
    double t_end = 20.0;
    double dt_safety = 0.9;
    Scheme scheme = Scheme::euler;
    std::vector<double> sample_times;  // strictly ascending, in (0, t_end]

    void validate() const;
};

// count points geometrically spaced on [t_first, t_end], last one exactly t_end.
std::vector<double> log_spaced_times(double t_first, double t_end, std::size_t count);
std::vector<double> uniform_times(double t_first, double t_end, std::size_t count);

struct Snapshot {
    double t;
    Field field;
};

struct Trajectory {
    std::vector<Snapshot> samples;
};

// dt_safety / max_i D_i. Euler at this step is a convex combination of values.
double max_stable_dt(const OperatorApplier& op, Scheme scheme, double dt_safety);

Field step(const OperatorApplier& op, const Field& u, double dt, Scheme scheme);

/**
 * Integrates from t = 0 with the stable step, shortening the step that would
 * cross a sample time so every snapshot is a genuine scheme state.
 * Throws NumericalError carrying the time at which values went non-finite.
 */
Trajectory evolve(const OperatorApplier& op, const Field& u0, const TimeSchedule& schedule);

}  // namespace nlheat
