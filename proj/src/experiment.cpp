#include "nlheat/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "nlheat/errors.hpp"
#include "nlheat/integrator.hpp"
#include "nlheat/nonlocal_operator.hpp"

namespace nlheat {

namespace {

constexpr std::size_t kKernelReportSamples = 8;

double elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

std::string format_csv_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) out.push_back(item);
    if (!text.empty() && text.back() == sep) out.emplace_back();
    return out;
}

double parse_cell(const std::string& cell, std::size_t line) {
    std::string text = cell;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text == "nan" || text == "-nan") return std::numeric_limits<double>::quiet_NaN();
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size()) {
        throw InvalidArgument("csv line " + std::to_string(line) + ": cannot parse '" + text + "'");
    }
    return v;
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
    const std::filesystem::path p(path);
    std::filesystem::path out = p.parent_path() / (p.stem().string() + "_" + suffix + p.extension().string());
    return out.string();
}

}  // namespace

Field initial_datum(const ExperimentConfig& config, const Grid& grid) {
    const double w = config.datum_width;
    Field raw = config.datum == InitialDatum::gaussian
                    ? sample_function(grid, [w](const Point& x) { return std::exp(-0.5 * (norm(x) * norm(x)) / (w * w)); })
                    : sample_function(grid, [w](const Point& x) { return norm(x) <= w ? 1.0 : 0.0; });
    const double mass = total_mass(raw);
    if (!(mass > 0.0)) {
        throw ConfigError("initial.width: datum has no mass on this grid; increase the width or refine the grid");
    }
    return scaled(raw, config.datum_mass / mass);
}

ExperimentResult simulate(const ExperimentConfig& config) {
    validate_config(config);
    ExperimentResult result;
    const auto t0 = std::chrono::steady_clock::now();
    const Grid grid = config.grid();
    const KernelSpec spec = config.kernel();
    const Strategy strategy = config.resolved_strategy();
    const OperatorApplier op =
        OperatorApplier::assemble(spec, grid, config.boundary_mode, strategy, config.dense_budget_bytes);
    result.kernel_report = validate_kernel(spec, grid, kKernelReportSamples);
    result.timings.assemble_ms = elapsed_ms(t0);

    const auto t1 = std::chrono::steady_clock::now();
    const Field u0 = initial_datum(config, grid);
    const Trajectory trajectory = evolve(op, u0, config.schedule());
    result.timings.evolve_ms = elapsed_ms(t1);

    const auto t2 = std::chrono::steady_clock::now();
    // The energy uses interior weights only, so absorbing runs borrow a
    // conservative twin of the same kernel.
    if (config.boundary_mode == BoundaryMode::conservative) {
        result.series = record(trajectory, &op, config.q_list);
    } else {
        const OperatorApplier twin =
            OperatorApplier::assemble(spec, grid, BoundaryMode::conservative, strategy, config.dense_budget_bytes);
        result.series = record(trajectory, &twin, config.q_list);
    }
    for (double q : config.q_list) {
        DecayFit fit = fit_decay(result.series, q, config.window_fraction);
        result.verdicts.push_back(verify_decay(fit, config.tolerance));
        result.fits.push_back(fit);
    }
    result.exploratory = config.dimension == 1;
    result.timings.analysis_ms = elapsed_ms(t2);
    return result;
}

std::string series_csv(const DecaySeries& series) {
    std::string out = "t,mass,l1,linf";
    for (double q : series.q_list) out += ",lq_" + format_real(q);
    out += ",energy_q2\n";
    for (const auto& row : series.rows) {
        out += format_csv_real(row.t);
        out += ',' + format_csv_real(row.mass);
        out += ',' + format_csv_real(row.l1);
        out += ',' + format_csv_real(row.linf);
        for (double v : row.lq) out += ',' + format_csv_real(v);
        out += ',' + format_csv_real(row.energy_q2);
        out += '\n';
    }
    return out;
}

std::string summary_json(const ExperimentConfig& config, const ExperimentResult& result) {
    using nlohmann::json;
    json echo = json::object();
    for (const auto& [key, value] : config_entries(config)) echo[key] = value;

    const KernelReport& kr = result.kernel_report;
    json report = {
        {"symmetry_defect", kr.symmetry_defect},
        {"max_value", kr.max_value},
        {"row_integral_estimate", kr.row_integral_estimate},
        {"tail_bound_satisfied", kr.tail_bound_satisfied},
        {"worst_tail_ratio", kr.worst_tail_ratio},
    };

    json fits = json::array();
    for (std::size_t k = 0; k < result.fits.size(); ++k) {
        const DecayFit& f = result.fits[k];
        fits.push_back({
            {"q", f.q},
            {"t_lo", f.t_lo},
            {"t_hi", f.t_hi},
            {"points", f.points},
            {"slope", f.slope},
            {"intercept", f.intercept},
            {"r_squared", f.r_squared},
            {"theoretical_exponent", f.theoretical_exponent},
            {"relative_error", f.relative_error},
            {"pass", result.verdicts[k].pass},
            {"details", result.verdicts[k].details},
        });
    }

    json summary = {
        {"config_echo", echo},
        {"kernel_report", report},
        {"fits", fits},
        {"timings_ms",
         {{"assemble", result.timings.assemble_ms},
          {"evolve", result.timings.evolve_ms},
          {"analysis", result.timings.analysis_ms}}},
        {"exploratory", result.exploratory},
    };
    return summary.dump(2) + "\n";
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".partial";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw NumericalError(path + ": cannot open for writing");
        out << content;
        out.flush();
        if (!out) {
            out.close();
            std::filesystem::remove(tmp);
            throw NumericalError(path + ": write failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw NumericalError(path + ": " + ec.message());
    }
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    ExperimentResult result = simulate(config);
    const std::string csv = series_csv(result.series);
    const std::string json = summary_json(config, result);
    write_file_atomic(config.csv_path, csv);
    try {
        write_file_atomic(config.json_path, json);
    } catch (...) {
        std::filesystem::remove(config.csv_path);
        throw;
    }
    return result;
}

DecaySeries parse_series_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw InvalidArgument("csv is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split(line, ',');
    if (header.size() < 5 || header[0] != "t" || header[1] != "mass" || header[2] != "l1" || header[3] != "linf" ||
        header.back() != "energy_q2") {
        throw InvalidArgument("csv header must read t,mass,l1,linf,lq_<q>...,energy_q2");
    }
    DecaySeries series;
    for (std::size_t c = 4; c + 1 < header.size(); ++c) {
        if (header[c].rfind("lq_", 0) != 0) throw InvalidArgument("unexpected csv column '" + header[c] + "'");
        series.q_list.push_back(parse_cell(header[c].substr(3), 1));
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> cells = split(line, ',');
        if (cells.size() != header.size()) {
            throw InvalidArgument("csv line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(header.size()) + " cells");
        }
        DecayRow row;
        row.t = parse_cell(cells[0], line_no);
        row.mass = parse_cell(cells[1], line_no);
        row.l1 = parse_cell(cells[2], line_no);
        row.linf = parse_cell(cells[3], line_no);
        for (std::size_t c = 4; c + 1 < cells.size(); ++c) row.lq.push_back(parse_cell(cells[c], line_no));
        row.energy_q2 = parse_cell(cells.back(), line_no);
        series.rows.push_back(std::move(row));
    }
    return series;
}

DecaySeries read_series_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument(path + ": cannot open csv");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_series_csv(buf.str());
}

std::string to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::sigma: return "sigma";
        case SweepAxis::q: return "q";
        case SweepAxis::kernel_family: return "kernel_family";
    }
    return "unknown";
}

SweepAxis parse_sweep_axis(const std::string& name) {
    if (name == "sigma") return SweepAxis::sigma;
    if (name == "q") return SweepAxis::q;
    if (name == "kernel_family") return SweepAxis::kernel_family;
    throw InvalidArgument("unknown sweep axis '" + name + "' (expected sigma, q or kernel_family)");
}

ExperimentConfig sweep_point(const ExperimentConfig& base, SweepAxis axis, const std::string& value) {
    // Reuse the config grammar so values obey the same parsing and ranges.
    const std::string key = axis == SweepAxis::sigma ? "kernel.sigma"
                            : axis == SweepAxis::q   ? "analysis.q_list"
                                                     : "kernel.family";
    std::string doc;
    for (const auto& [k, v] : config_entries(base)) {
        if (k != key) doc += k + " = " + v + "\n";
    }
    doc += key + " = " + value + "\n";
    ExperimentConfig point = parse_config(doc);
    if (axis == SweepAxis::q && point.q_list.size() != 1) throw ConfigError("analysis.q_list: sweep takes one q per value");
    point.csv_path = with_suffix(base.csv_path, to_string(axis) + "_" + value);
    point.json_path = with_suffix(base.json_path, to_string(axis) + "_" + value);
    return point;
}

std::vector<SweepRow> sweep(const ExperimentConfig& base, SweepAxis axis, const std::vector<std::string>& values) {
    if (values.empty()) throw ConfigError("sweep: values list must not be empty");
    std::vector<ExperimentConfig> points;
    for (const auto& v : values) points.push_back(sweep_point(base, axis, v));

    std::vector<SweepRow> rows;
    for (std::size_t k = 0; k < values.size(); ++k) {
        SweepRow row;
        row.value = values[k];
        try {
            const ExperimentResult r = run_experiment(points[k]);
            const DecayFit& fit = r.fits.front();
            row.fitted_slope = fit.slope;
            row.theoretical_exponent = fit.theoretical_exponent;
            row.relative_error = fit.relative_error;
            row.status = r.verdicts.front().pass ? "pass" : "fail";
        } catch (const std::exception& e) {
            row.fitted_slope = std::numeric_limits<double>::quiet_NaN();
            row.theoretical_exponent = std::numeric_limits<double>::quiet_NaN();
            row.relative_error = std::numeric_limits<double>::quiet_NaN();
            row.status = std::string("error: ") + e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string sweep_table_csv(SweepAxis axis, const std::vector<SweepRow>& rows) {
    std::string out = to_string(axis) + ",fitted_slope,theoretical_exponent,relative_error,status\n";
    for (const auto& r : rows) {
        std::string status = r.status;
        for (char& c : status) {
            if (c == ',' || c == '\n') c = ';';
        }
        out += r.value + ',' + format_csv_real(r.fitted_slope) + ',' + format_csv_real(r.theoretical_exponent) + ',' +
               format_csv_real(r.relative_error) + ',' + status + '\n';
    }
    return out;
}

}  // namespace nlheat
