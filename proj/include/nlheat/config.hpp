#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlheat/integrator.hpp"
#include "nlheat/kernels.hpp"
#include "nlheat/nonlocal_operator.hpp"

namespace nlheat {

enum class InitialDatum { gaussian, indicator };

std::string to_string(InitialDatum datum);

/**
 * Flat experiment description. Keys in the text form are dotted
 * (grid.dimension, kernel.sigma, ...); see README for the full table.
 */
struct ExperimentConfig {
    int dimension = 2;
    double half_width = 40.0;
    std::size_t points_per_axis = 128;

    KernelFamily family = KernelFamily::fractional_tail;
    double sigma = 0.5;
    double c1 = 1.0;
    double cap = 1.0;
    double modulation = 0.0;
    double radius = 1.0;
    bool normalize = true;

    BoundaryMode boundary_mode = BoundaryMode::absorbing;
    std::optional<Strategy> strategy;  // empty: fft for convolution kernels, else on_the_fly

    Scheme scheme = Scheme::euler;
    double dt_safety = 0.9;
    double t_end = 20.0;
    std::size_t sample_count = 40;
    double first_sample = 1.0;

    std::vector<double> q_list{2.0};
    double window_fraction = 0.5;
    double tolerance = 0.2;

    InitialDatum datum = InitialDatum::gaussian;
    double datum_width = 2.0;
    double datum_mass = 1.0;

    std::uint64_t seed = 0;
    std::string csv_path = "series.csv";
    std::string json_path = "summary.json";

    std::size_t dense_budget_bytes = kDefaultDenseBudgetBytes;

    bool operator==(const ExperimentConfig&) const = default;

    Strategy resolved_strategy() const;
    KernelSpec kernel() const;
    Grid grid() const;
    TimeSchedule schedule() const;
};

// Throws ConfigError("<key>: <constraint>") for the first violation found.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Cross-field constraints; parse_config calls this after reading all keys.
void validate_config(const ExperimentConfig& config);

// Ordered (key, value) pairs at full precision; reparses to an equal config.
std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& config);
std::string serialize_config(const ExperimentConfig& config);

// Shortest round-trip decimal form of a double.
std::string format_real(double value);

}  // namespace nlheat
