#pragma once

#include <string>
#include <vector>

#include "nlheat/config.hpp"
#include "nlheat/decay_analysis.hpp"
#include "nlheat/grid.hpp"
#include "nlheat/kernels.hpp"

namespace nlheat {

// Centered gaussian exp(-|x|^2 / (2 width^2)) or ball indicator |x| <= width,
// rescaled to the configured discrete mass.
Field initial_datum(const ExperimentConfig& config, const Grid& grid);

struct Timings {
    double assemble_ms = 0.0;
    double evolve_ms = 0.0;
    double analysis_ms = 0.0;
};

struct ExperimentResult {
    DecaySeries series;
    KernelReport kernel_report;
    std::vector<DecayFit> fits;  // one per q_list entry
    std::vector<DecayVerdict> verdicts;
    bool exploratory = false;  // n = 1: decay rate not asserted, reported only
    Timings timings;
};

// Pure computation: no files touched.
ExperimentResult simulate(const ExperimentConfig& config);

// simulate, then write config.csv_path and config.json_path. A failed run
// leaves neither file behind.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Header t,mass,l1,linf,lq_<q>...,energy_q2; 17 significant digits.
std::string series_csv(const DecaySeries& series);
std::string summary_json(const ExperimentConfig& config, const ExperimentResult& result);

// Inverse of series_csv; metadata (dimension, sigma) is left unset.
DecaySeries parse_series_csv(const std::string& text);
DecaySeries read_series_csv(const std::string& path);

// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

enum class SweepAxis { sigma, q, kernel_family };

std::string to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& name);

struct SweepRow {
    std::string value;
    double fitted_slope = 0.0;
    double theoretical_exponent = 0.0;
    double relative_error = 0.0;
    std::string status;  // "pass", "fail" or "error: <message>"
};

// Applies one value to a copy of the base config and revalidates it.
ExperimentConfig sweep_point(const ExperimentConfig& base, SweepAxis axis, const std::string& value);

/**
 * One run_experiment per value with outputs suffixed by the value. Invalid
 * values are rejected before any run starts; failures during a run are
 * recorded in the row's status and the sweep moves on.
 */
std::vector<SweepRow> sweep(const ExperimentConfig& base, SweepAxis axis, const std::vector<std::string>& values);

std::string sweep_table_csv(SweepAxis axis, const std::vector<SweepRow>& rows);

}  // namespace nlheat
