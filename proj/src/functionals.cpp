#include "nlheat/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nlheat/convolution.hpp"
#include "nlheat/errors.hpp"

namespace nlheat {

double lq_norm(const Field& u, double q) {
    if (!(q >= 1.0)) throw InvalidArgument("lq_norm needs q >= 1");
    const auto v = u.values();
    if (q == kInfinity) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    double s = 0.0;
    if (q == 1.0) {
        for (double x : v) s += std::abs(x);
    } else if (q == 2.0) {
        for (double x : v) s += x * x;
    } else {
        for (double x : v) s += std::pow(std::abs(x), q);
    }
    s *= u.grid().cell_volume();
    return q == 1.0 ? s : std::pow(s, 1.0 / q);
}

double total_mass(const Field& u) {
    double s = 0.0;
    for (double x : u.values()) s += x;
    return s * u.grid().cell_volume();
}

double signed_power(double u, double q) {
    if (u == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(u), q - 1.0), u);
}

namespace {

double abs_power(double x, double q) {
    const double a = std::abs(x);
    if (q == 2.0) return a * a;
    if (q == 1.0) return a;
    return std::pow(a, q);
}

/**
 * Translation-invariant pair sums sum_i sum_{j != i} table[x_i - x_j] f(u_i, u_j).
 * The table is indexed by lattice offsets k in [-(M-1), M-1]^n.
 */
class OffsetTable {
public:
    template <class Weight>
    OffsetTable(const Grid& grid, Weight&& weight) : grid_(grid), M_(grid.points_per_axis()) {
        const int dim = grid.dimension();
        width_ = 2 * M_ - 1;
        std::size_t size = 1;
        for (int d = 0; d < dim; ++d) size *= width_;
        values_.resize(size);
        for (std::size_t flat = 0; flat < size; ++flat) {
            std::size_t rest = flat;
            Point z{0.0, 0.0, 0.0};
            bool origin = true;
            for (int d = dim - 1; d >= 0; --d) {
                const long k = static_cast<long>(rest % width_) - static_cast<long>(M_ - 1);
                rest /= width_;
                z[d] = static_cast<double>(k) * grid.spacing();
                origin = origin && k == 0;
            }
            values_[flat] = origin ? 0.0 : weight(z);
        }
    }

    template <class F>
    double pair_sum(std::span<const double> u, F&& f) const {
        const int dim = grid_.dimension();
        const std::size_t N = grid_.cell_count();
        const std::size_t M = M_;
        double total = 0.0;
        if (dim == 1) {
            for (std::size_t i = 0; i < N; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < N; ++j) {
                    if (j != i) s += values_[i + M - 1 - j] * f(u[i], u[j]);
                }
                total += s;
            }
            return total;
        }
        // Rows of the last axis are contiguous in both the field and the table.
        const std::size_t rows = N / M;
        for (std::size_t i = 0; i < N; ++i) {
            const auto mi = grid_.multi_index(i);
            const double ui = u[i];
            double s = 0.0;
            for (std::size_t r = 0; r < rows; ++r) {
                const auto mj = grid_.multi_index(r * M);
                std::size_t base = 0;
                for (int d = 0; d < dim - 1; ++d) base = base * width_ + (mi[d] + M - 1 - mj[d]);
                const double* trow = values_.data() + base * width_ + (mi[dim - 1] + M - 1);
                const double* urow = u.data() + r * M;
                for (std::size_t c = 0; c < M; ++c) s += trow[-static_cast<long>(c)] * f(ui, urow[c]);
            }
            total += s;
        }
        return total;
    }

private:
    Grid grid_;
    std::size_t M_;
    std::size_t width_;
    std::vector<double> values_;
};

void require_conservative(const OperatorApplier& op, const char* what) {
    if (op.boundary_mode() != BoundaryMode::conservative) {
        throw InvalidArgument(std::string(what) + " requires a conservative-mode operator");
    }
}

// sum_i sum_j w_ij f(u_i, u_j) over the operator's weights.
template <class F>
double operator_pair_sum(const OperatorApplier& op, std::span<const double> u, F&& f) {
    const Grid& grid = op.grid();
    if (op.spec().is_convolution()) {
        const double hn = grid.cell_volume();
        const KernelSpec& spec = op.spec();
        OffsetTable table(grid, [&](const Point& z) { return evaluate_offset(spec, z) * hn; });
        return table.pair_sum(u, f);
    }
    const std::size_t N = grid.cell_count();
    double total = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < N; ++j) {
            if (j != i) s += op.weight(i, j) * f(u[i], u[j]);
        }
        total += s;
    }
    return total;
}

}  // namespace

double energy(const OperatorApplier& op, const Field& u, double q) {
    if (!(q > 1.0)) throw InvalidArgument("energy needs q > 1");
    require_conservative(op, "energy");
    if (!(u.grid() == op.grid())) throw InvalidArgument("field grid does not match operator grid");
    const double hn = u.grid().cell_volume();
    const auto v = u.values();
    if (q == 2.0 && op.strategy() == Strategy::fft_convolution) {
        // sum_ij w_ij (u_j - u_i)^2 = 2 sum_i u_i^2 D_i - 2 sum_i u_i (W u)_i
        const std::vector<double> wu = op.weighted_sums(v);
        const auto d = op.interior_row_sums();
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * (v[i] * d[i] - wu[i]);
        return std::max(0.0, 2.0 * s * hn);
    }
    return hn * operator_pair_sum(op, v, [q](double a, double b) { return abs_power(b - a, q); });
}

double dissipation_identity_residual(const OperatorApplier& op, const Trajectory& trajectory, double q,
                                     std::size_t index) {
    if (!(q > 1.0)) throw InvalidArgument("dissipation identity needs q > 1");
    require_conservative(op, "dissipation identity");
    const auto& s = trajectory.samples;
    if (s.size() < 3 || index == 0 || index + 1 >= s.size()) {
        throw InvalidArgument("dissipation identity needs snapshots on both sides of the index");
    }
    const double dt_lo = s[index].t - s[index - 1].t;
    const double dt_hi = s[index + 1].t - s[index].t;
    if (std::abs(dt_hi - dt_lo) > 1e-9 * std::max(dt_lo, dt_hi)) {
        throw InvalidArgument("dissipation identity needs uniformly spaced snapshots around the index");
    }
    auto phi = [q](const Field& u) {
        double sum = 0.0;
        for (double x : u.values()) sum += abs_power(x, q);
        return sum * u.grid().cell_volume();
    };
    const double derivative = (phi(s[index + 1].field) - phi(s[index - 1].field)) / (dt_lo + dt_hi);

    const Field& u = s[index].field;
    const double pairing = u.grid().cell_volume() *
                           operator_pair_sum(op, u.values(), [q](double a, double b) {
                               return (b - a) * (signed_power(b, q) - signed_power(a, q));
                           });
    return std::abs(derivative + 0.5 * q * pairing);
}

double fractional_seminorm_direct(const Field& u, double s, double q) {
    if (!(s > 0.0 && s < 1.0)) throw InvalidArgument("seminorm order s must lie in (0,1)");
    if (!(q >= 1.0)) throw InvalidArgument("seminorm needs q >= 1");
    const Grid& grid = u.grid();
    const double exponent = grid.dimension() + q * s;
    OffsetTable table(grid, [&](const Point& z) { return std::pow(norm(z), -exponent); });
    const double sum = table.pair_sum(u.values(), [q](double a, double b) { return abs_power(b - a, q); });
    const double hn = grid.cell_volume();
    return std::pow(sum * hn * hn, 1.0 / q);
}

double fractional_seminorm(const Field& u, double s, double q) {
    if (q != 2.0) return fractional_seminorm_direct(u, s, q);
    if (!(s > 0.0 && s < 1.0)) throw InvalidArgument("seminorm order s must lie in (0,1)");
    // sum_{i != j} K_ij (u_j - u_i)^2 = 2 sum_i u_i^2 (K 1)_i - 2 sum_i u_i (K u)_i
    const Grid& grid = u.grid();
    const double exponent = grid.dimension() + 2.0 * s;
    LatticeConvolver conv(grid, [&](const Point& z) {
        const double r = norm(z);
        return r == 0.0 ? 0.0 : std::pow(r, -exponent);
    });
    const auto v = u.values();
    const std::vector<double> ones(v.size(), 1.0);
    const std::vector<double> k1 = conv.apply(ones);
    const std::vector<double> ku = conv.apply(v);
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) sum += v[i] * (v[i] * k1[i] - ku[i]);
    const double hn = grid.cell_volume();
    return std::sqrt(std::max(0.0, 2.0 * sum) * hn * hn);
}

double MollifierSpec::at(const std::array<int, 3>& offset) const {
    const int width = 2 * reach + 1;
    std::size_t flat = 0;
    for (int d = 0; d < grid.dimension(); ++d) {
        if (std::abs(offset[d]) > reach) return 0.0;
        flat = flat * width + static_cast<std::size_t>(offset[d] + reach);
    }
    return stencil[flat];
}

MollifierSpec build_mollifier(const Grid& grid, double radius) {
    const double h = grid.spacing();
    if (!(radius >= 3.0 * h)) {
        std::ostringstream msg;
        msg << "mollifier radius " << radius << " is below 3h = " << 3.0 * h << "; refine the grid";
        throw InvalidArgument(msg.str());
    }
    const int dim = grid.dimension();
    const int reach = static_cast<int>(std::floor(radius / h));
    const int width = 2 * reach + 1;
    std::size_t size = 1;
    for (int d = 0; d < dim; ++d) size *= width;

    std::vector<double> stencil(size, 0.0);
    double sum = 0.0;
    for (std::size_t flat = 0; flat < size; ++flat) {
        std::size_t rest = flat;
        double r2 = 0.0;
        for (int d = dim - 1; d >= 0; --d) {
            const double z = (static_cast<double>(rest % width) - reach) * h;
            rest /= width;
            r2 += z * z;
        }
        const double t = r2 / (radius * radius);
        if (t < 1.0) {
            stencil[flat] = std::exp(-1.0 / (1.0 - t));
            sum += stencil[flat];
        }
    }
    const double scale = 1.0 / (sum * grid.cell_volume());
    for (double& v : stencil) v *= scale;
    return MollifierSpec{radius, reach, grid, std::move(stencil)};
}

Decomposition mollifier_decompose(const Field& u, const MollifierSpec& psi) {
    const Grid& grid = u.grid();
    if (!(grid == psi.grid)) throw InvalidArgument("mollifier was built for a different grid");
    const int dim = grid.dimension();
    const long M = static_cast<long>(grid.points_per_axis());
    const int reach = psi.reach;
    const int width = 2 * reach + 1;
    const double hn = grid.cell_volume();
    const std::size_t N = grid.cell_count();

    bool truncated = false;
    for (std::size_t i = 0; i < N; ++i) {
        if (u[i] != 0.0 && grid.distance_to_boundary(grid.center(i)) < psi.radius) {
            truncated = true;
            break;
        }
    }

    std::size_t stencil_size = psi.stencil.size();
    std::vector<std::array<long, 3>> offsets;
    std::vector<double> weights;
    for (std::size_t flat = 0; flat < stencil_size; ++flat) {
        if (psi.stencil[flat] == 0.0) continue;
        std::array<long, 3> k{0, 0, 0};
        std::size_t rest = flat;
        for (int d = dim - 1; d >= 0; --d) {
            k[d] = static_cast<long>(rest % width) - reach;
            rest /= width;
        }
        offsets.push_back(k);
        weights.push_back(psi.stencil[flat] * hn);
    }

    std::vector<double> v(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
        const auto mi = grid.multi_index(i);
        double s = 0.0;
        for (std::size_t m = 0; m < offsets.size(); ++m) {
            std::array<std::size_t, 3> mj{0, 0, 0};
            bool inside = true;
            for (int d = 0; d < dim; ++d) {
                const long c = static_cast<long>(mi[d]) + offsets[m][d];
                if (c < 0 || c >= M) {
                    inside = false;
                    break;
                }
                mj[d] = static_cast<std::size_t>(c);
            }
            if (inside) s += weights[m] * u[grid.flat_index(mj)];
        }
        v[i] = s;
    }
    std::vector<double> w(N);
    for (std::size_t i = 0; i < N; ++i) w[i] = u[i] - v[i];
    return Decomposition{Field(grid, std::move(v)), Field(grid, std::move(w)), truncated};
}

std::string to_string(PairingMethod method) {
    switch (method) {
        case PairingMethod::exact_q2: return "exact_q2";
        case PairingMethod::appendix_bound: return "appendix_bound";
        case PairingMethod::numeric_minimization: return "numeric_minimization";
    }
    return "unknown";
}

namespace {

// (1 - x)(1 - phi(x)) / |1 - x|^q, the pairing ratio with a = 1, b = x.
double pairing_ratio(double x, double q) {
    const double gap = 1.0 - x;
    return gap * (1.0 - signed_power(x, q)) / std::pow(std::abs(gap), q);
}

}  // namespace

PairingConstant pairing_constant(double q) {
    if (!(q > 1.0)) throw InvalidArgument("pairing constant needs q > 1");
    if (q == 2.0) return PairingConstant{q, 1.0, PairingMethod::exact_q2};
    if (q > 2.0) return PairingConstant{q, std::pow(2.0, -q), PairingMethod::appendix_bound};

    // Minimize over x = 1 - t, t in [1e-6, 2): log-spaced sweep, then zoom.
    constexpr double kResolution = 1e-6;
    constexpr int kPoints = 4001;
    double lo = std::log(kResolution);
    double hi = std::log(2.0 - 1e-12);
    double best = kInfinity;
    double best_log_t = lo;
    for (int round = 0; round < 6; ++round) {
        const double step = (hi - lo) / (kPoints - 1);
        for (int k = 0; k < kPoints; ++k) {
            const double log_t = lo + step * k;
            const double r = pairing_ratio(1.0 - std::exp(log_t), q);
            if (r < best) {
                best = r;
                best_log_t = log_t;
            }
        }
        lo = std::max(std::log(kResolution), best_log_t - 2.0 * step);
        hi = std::min(std::log(2.0 - 1e-12), best_log_t + 2.0 * step);
    }
    return PairingConstant{q, 0.999 * best, PairingMethod::numeric_minimization};
}

double pairing_check(double a, double b, double q, const PairingConstant& c) {
    const double lhs = (a - b) * (signed_power(a, q) - signed_power(b, q));
    return lhs - c.constant * std::pow(std::abs(a - b), q);
}

double keyprop_ratio(const Field& u, const OperatorApplier& op, double sigma, double q) {
    if (!(q > 2.0 * sigma)) throw InvalidArgument("keyprop_ratio needs q > 2 sigma");
    if (!(q > 1.0)) throw InvalidArgument("keyprop_ratio needs q > 1");
    require_conservative(op, "keyprop_ratio");
    if (!op.spec().has_fractional_tail()) {
        throw InvalidArgument("keyprop_ratio needs a kernel with a fractional tail");
    }
    const MollifierSpec psi = build_mollifier(u.grid(), 1.0);
    const Decomposition parts = mollifier_decompose(u, psi);
    if (parts.truncated) throw InvalidArgument("keyprop_ratio needs a field that vanishes near the boundary");

    const double s = 2.0 * sigma / q;
    const double numerator = std::pow(fractional_seminorm(parts.smooth_part, s, q), q) +
                             std::pow(lq_norm(parts.remainder, q), q);
    const double e = energy(op, u, q);
    if (e == 0.0) {
        if (numerator == 0.0) return 0.0;
        throw NumericalError("energy vanishes while the seminorm side does not");
    }
    return numerator / e;
}

double sobolev_ratio(const Field& u, double s, double q) {
    const int n = u.grid().dimension();
    if (!(s * q < n)) throw InvalidArgument("sobolev_ratio needs s q < n");
    const double q_star = n * q / (n - s * q);
    const double seminorm = fractional_seminorm(u, s, q);
    if (seminorm == 0.0) throw InvalidArgument("sobolev_ratio needs a nonconstant field");
    return std::pow(lq_norm(u, q_star), q) / std::pow(seminorm, q);
}

InterpolationExponents interpolation_exponents(int n, double q, double sigma) {
    if (!(q > 1.0)) throw InvalidArgument("interpolation exponents need q > 1");
    if (!(sigma > 0.0 && sigma < 1.0)) throw InvalidArgument("sigma must lie in (0,1)");
    if (!(n > 2.0 * sigma)) throw InvalidArgument("interpolation exponents need n > 2 sigma");
    // 1 - 2 sigma / (n (q - 1) + 2 sigma), written without the cancellation.
    const double theta = n * (q - 1.0) / (n * (q - 1.0) + 2.0 * sigma);
    const double q_star = n * q / (n - 2.0 * sigma);
    return {theta, q_star};
}

Lemma41Result lemma41_check(const Field& u0, const Field& u, const OperatorApplier& op, double q, double sigma) {
    const auto [theta, q_star] = interpolation_exponents(u.grid().dimension(), q, sigma);
    Lemma41Result r;
    r.lhs = std::pow(lq_norm(u, q), q);
    r.term2 = energy(op, u, q);
    r.term1 = std::pow(lq_norm(u0, 1.0), q * (1.0 - theta)) * std::pow(r.term2, theta);
    const double denom = r.term1 + r.term2;
    if (denom == 0.0) {
        if (r.lhs == 0.0) return r;
        throw NumericalError("energy vanishes while ||u||_q does not");
    }
    r.constant = r.lhs / denom;
    return r;
}

}  // namespace nlheat
