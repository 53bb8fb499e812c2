#include "nlheat/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "nlheat/errors.hpp"

namespace nlheat {

std::string to_string(InitialDatum datum) { return datum == InitialDatum::gaussian ? "gaussian" : "indicator"; }

std::string format_real(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

Strategy ExperimentConfig::resolved_strategy() const {
    if (strategy) return *strategy;
    return kernel().is_convolution() ? Strategy::fft_convolution : Strategy::on_the_fly;
}

KernelSpec ExperimentConfig::kernel() const {
    KernelSpec spec;
    spec.family = family;
    spec.dimension = dimension;
    spec.sigma = sigma;
    spec.c1 = c1;
    spec.cap = cap;
    spec.modulation = family == KernelFamily::nonconvolution_fractional ? modulation : 0.0;
    spec.radius = radius;
    validate_spec(spec);
    return normalize ? normalize_mass(spec, 1.0) : spec;
}

Grid ExperimentConfig::grid() const { return build_grid(dimension, half_width, points_per_axis); }

TimeSchedule ExperimentConfig::schedule() const {
    TimeSchedule s;
    s.t_end = t_end;
    s.dt_safety = dt_safety;
    s.scheme = scheme;
    s.sample_times = log_spaced_times(first_sample, t_end, sample_count);
    return s;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& key, const std::string& what) { throw ConfigError(key + ": " + what); }

double parse_real(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (!text.empty() && *first == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) fail(key, "expected a real number, got '" + text + "'");
    return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
    long long v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        fail(key, "expected an integer, got '" + text + "'");
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true") return true;
    if (text == "false") return false;
    fail(key, "expected true or false, got '" + text + "'");
}

template <class Parse>
auto parse_enum(const std::string& key, const std::string& text, Parse&& parse) {
    try {
        return parse(text);
    } catch (const InvalidArgument& e) {
        fail(key, e.what());
    }
}

std::vector<double> parse_real_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_real(key, trim(item)));
    if (out.empty()) fail(key, "list must not be empty");
    return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"grid.dimension", [](auto& c, auto& k, auto& v) { c.dimension = static_cast<int>(parse_integer(k, v)); }},
        {"grid.half_width", [](auto& c, auto& k, auto& v) { c.half_width = parse_real(k, v); }},
        {"grid.points_per_axis",
         [](auto& c, auto& k, auto& v) {
             const long long m = parse_integer(k, v);
             if (m < 0) fail(k, "points_per_axis must be an even integer >= 2");
             c.points_per_axis = static_cast<std::size_t>(m);
         }},
        {"kernel.family", [](auto& c, auto& k, auto& v) { c.family = parse_enum(k, v, parse_kernel_family); }},
        {"kernel.sigma", [](auto& c, auto& k, auto& v) { c.sigma = parse_real(k, v); }},
        {"kernel.c1", [](auto& c, auto& k, auto& v) { c.c1 = parse_real(k, v); }},
        {"kernel.cap", [](auto& c, auto& k, auto& v) { c.cap = parse_real(k, v); }},
        {"kernel.modulation", [](auto& c, auto& k, auto& v) { c.modulation = parse_real(k, v); }},
        {"kernel.radius", [](auto& c, auto& k, auto& v) { c.radius = parse_real(k, v); }},
        {"kernel.normalize", [](auto& c, auto& k, auto& v) { c.normalize = parse_bool(k, v); }},
        {"operator.boundary_mode",
         [](auto& c, auto& k, auto& v) { c.boundary_mode = parse_enum(k, v, parse_boundary_mode); }},
        {"operator.strategy",
         [](auto& c, auto& k, auto& v) {
             if (v == "auto") {
                 c.strategy.reset();
             } else {
                 c.strategy = parse_enum(k, v, parse_strategy);
             }
         }},
        {"operator.dense_budget_mib",
         [](auto& c, auto& k, auto& v) {
             const long long mib = parse_integer(k, v);
             if (mib <= 0) fail(k, "dense budget must be positive");
             c.dense_budget_bytes = static_cast<std::size_t>(mib) << 20;
         }},
        {"time.scheme", [](auto& c, auto& k, auto& v) { c.scheme = parse_enum(k, v, parse_scheme); }},
        {"time.dt_safety", [](auto& c, auto& k, auto& v) { c.dt_safety = parse_real(k, v); }},
        {"time.t_end", [](auto& c, auto& k, auto& v) { c.t_end = parse_real(k, v); }},
        {"time.sample_count",
         [](auto& c, auto& k, auto& v) {
             const long long n = parse_integer(k, v);
             if (n < 0) fail(k, "sample_count must be positive");
             c.sample_count = static_cast<std::size_t>(n);
         }},
        {"time.first_sample", [](auto& c, auto& k, auto& v) { c.first_sample = parse_real(k, v); }},
        {"analysis.q_list", [](auto& c, auto& k, auto& v) { c.q_list = parse_real_list(k, v); }},
        {"analysis.window_fraction", [](auto& c, auto& k, auto& v) { c.window_fraction = parse_real(k, v); }},
        {"analysis.tolerance", [](auto& c, auto& k, auto& v) { c.tolerance = parse_real(k, v); }},
        {"initial.datum",
         [](auto& c, auto& k, auto& v) {
             if (v == "gaussian") {
                 c.datum = InitialDatum::gaussian;
             } else if (v == "indicator") {
                 c.datum = InitialDatum::indicator;
             } else {
                 fail(k, "expected gaussian or indicator, got '" + v + "'");
             }
         }},
        {"initial.width", [](auto& c, auto& k, auto& v) { c.datum_width = parse_real(k, v); }},
        {"initial.mass", [](auto& c, auto& k, auto& v) { c.datum_mass = parse_real(k, v); }},
        {"seed",
         [](auto& c, auto& k, auto& v) {
             const long long s = parse_integer(k, v);
             if (s < 0) fail(k, "seed must be nonnegative");
             c.seed = static_cast<std::uint64_t>(s);
         }},
        {"output.csv", [](auto& c, auto&, auto& v) { c.csv_path = v; }},
        {"output.json", [](auto& c, auto&, auto& v) { c.json_path = v; }},
    };
    return table;
}

}  // namespace

void validate_config(const ExperimentConfig& c) {
    if (c.dimension < 1 || c.dimension > 3) fail("grid.dimension", "dimension must be 1, 2 or 3");
    if (!(c.half_width > 0.0)) fail("grid.half_width", "half_width must be positive");
    if (c.points_per_axis < 2 || c.points_per_axis % 2 != 0) {
        fail("grid.points_per_axis", "points_per_axis must be an even integer >= 2");
    }
    if (!(c.sigma > 0.0 && c.sigma < 1.0)) fail("kernel.sigma", "sigma must lie in (0,1)");
    if (!(c.c1 > 0.0)) fail("kernel.c1", "c1 must be positive");
    if (!(c.cap > 0.0)) fail("kernel.cap", "cap must be positive");
    if (!(c.modulation >= 0.0 && c.modulation < 1.0)) fail("kernel.modulation", "modulation must lie in [0,1)");
    if (!(c.radius > 0.0)) fail("kernel.radius", "radius must be positive");
    if (c.family == KernelFamily::custom) fail("kernel.family", "custom kernels cannot be described in a config");
    const bool convolution = c.family != KernelFamily::nonconvolution_fractional;
    if (c.normalize && !convolution) {
        fail("kernel.normalize", "nonconvolution kernels cannot be mass-normalized; set kernel.normalize = false");
    }
    if (c.strategy == Strategy::fft_convolution && !convolution) {
        fail("operator.strategy", "fft_convolution requires a convolution kernel");
    }
    if (c.strategy == Strategy::dense) {
        double cells = 1.0;
        for (int d = 0; d < c.dimension; ++d) cells *= static_cast<double>(c.points_per_axis);
        if (cells * cells * sizeof(double) > static_cast<double>(c.dense_budget_bytes)) {
            fail("operator.strategy", "dense weights exceed the memory budget; use on_the_fly");
        }
    }
    if (!(c.dt_safety > 0.0 && c.dt_safety <= 1.0)) fail("time.dt_safety", "dt_safety must lie in (0,1]");
    if (!(c.t_end > 0.0)) fail("time.t_end", "t_end must be positive");
    if (c.sample_count < 5) fail("time.sample_count", "sample_count must be at least 5");
    if (!(c.first_sample > 0.0 && c.first_sample < c.t_end)) {
        fail("time.first_sample", "first_sample must lie in (0, t_end)");
    }
    for (double q : c.q_list) {
        if (!(q >= 1.0)) fail("analysis.q_list", "every q must be >= 1");
    }
    if (!(c.window_fraction > 0.0 && c.window_fraction < 1.0)) {
        fail("analysis.window_fraction", "window_fraction must lie in (0,1)");
    }
    if (!(c.tolerance > 0.0)) fail("analysis.tolerance", "tolerance must be positive");
    if (!(c.datum_width > 0.0)) fail("initial.width", "width must be positive");
    if (!(c.datum_mass > 0.0)) fail("initial.mass", "mass must be positive");
    if (c.csv_path.empty()) fail("output.csv", "path must not be empty");
    if (c.json_path.empty()) fail("output.json", "path must not be empty");
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig config;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) fail(key, "unknown key");
        if (!seen.insert(key).second) fail(key, "duplicate key");
        if (value.empty()) fail(key, "missing value");
        it->second(config, key, value);
    }
    validate_config(config);
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& c) {
    std::string q_list;
    for (std::size_t i = 0; i < c.q_list.size(); ++i) q_list += (i ? ", " : "") + format_real(c.q_list[i]);
    return {
        {"grid.dimension", std::to_string(c.dimension)},
        {"grid.half_width", format_real(c.half_width)},
        {"grid.points_per_axis", std::to_string(c.points_per_axis)},
        {"kernel.family", to_string(c.family)},
        {"kernel.sigma", format_real(c.sigma)},
        {"kernel.c1", format_real(c.c1)},
        {"kernel.cap", format_real(c.cap)},
        {"kernel.modulation", format_real(c.modulation)},
        {"kernel.radius", format_real(c.radius)},
        {"kernel.normalize", c.normalize ? "true" : "false"},
        {"operator.boundary_mode", to_string(c.boundary_mode)},
        {"operator.strategy", c.strategy ? to_string(*c.strategy) : "auto"},
        {"operator.dense_budget_mib", std::to_string(c.dense_budget_bytes >> 20)},
        {"time.scheme", to_string(c.scheme)},
        {"time.dt_safety", format_real(c.dt_safety)},
        {"time.t_end", format_real(c.t_end)},
        {"time.sample_count", std::to_string(c.sample_count)},
        {"time.first_sample", format_real(c.first_sample)},
        {"analysis.q_list", q_list},
        {"analysis.window_fraction", format_real(c.window_fraction)},
        {"analysis.tolerance", format_real(c.tolerance)},
        {"initial.datum", to_string(c.datum)},
        {"initial.width", format_real(c.datum_width)},
        {"initial.mass", format_real(c.datum_mass)},
        {"seed", std::to_string(c.seed)},
        {"output.csv", c.csv_path},
        {"output.json", c.json_path},
    };
}

std::string serialize_config(const ExperimentConfig& config) {
    std::string out;
    for (const auto& [key, value] : config_entries(config)) out += key + " = " + value + "\n";
    return out;
}

}  // namespace nlheat
