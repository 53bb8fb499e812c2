#include "nlheat/nonlocal_operator.hpp"

#include <sstream>

#include "nlheat/convolution.hpp"
#include "nlheat/errors.hpp"

namespace nlheat {

std::string to_string(BoundaryMode mode) {
    return mode == BoundaryMode::conservative ? "conservative" : "absorbing";
}

std::string to_string(Strategy strategy) {
    switch (strategy) {
        case Strategy::dense: return "dense";
        case Strategy::on_the_fly: return "on_the_fly";
        case Strategy::fft_convolution: return "fft_convolution";
    }
    return "unknown";
}

BoundaryMode parse_boundary_mode(const std::string& name) {
    if (name == "conservative") return BoundaryMode::conservative;
    if (name == "absorbing") return BoundaryMode::absorbing;
    throw InvalidArgument("unknown boundary mode '" + name + "'");
}

Strategy parse_strategy(const std::string& name) {
    if (name == "dense") return Strategy::dense;
    if (name == "on_the_fly") return Strategy::on_the_fly;
    if (name == "fft_convolution") return Strategy::fft_convolution;
    throw InvalidArgument("unknown operator strategy '" + name + "'");
}

OperatorApplier::OperatorApplier(const KernelSpec& spec, const Grid& grid, BoundaryMode mode, Strategy strategy)
    : spec_(spec), grid_(grid), mode_(mode), strategy_(strategy), row_sums_(grid), tail_(grid) {}

OperatorApplier OperatorApplier::assemble(const KernelSpec& spec, const Grid& grid, BoundaryMode mode,
                                          Strategy strategy, std::size_t dense_budget_bytes) {
    validate_spec(spec);
    if (spec.dimension != grid.dimension()) {
        throw InvalidArgument("kernel dimension does not match grid dimension");
    }
    const std::size_t N = grid.cell_count();
    if (strategy == Strategy::fft_convolution && !spec.is_convolution()) {
        throw UnsupportedOperation("fft_convolution requires a convolution kernel (compact_smooth or fractional_tail)");
    }
    if (strategy == Strategy::dense) {
        const double bytes = static_cast<double>(N) * static_cast<double>(N) * sizeof(double);
        if (bytes > static_cast<double>(dense_budget_bytes)) {
            std::ostringstream msg;
            msg << "dense weights need " << bytes / (1 << 20) << " MiB, over the " << dense_budget_bytes / (1 << 20)
                << " MiB budget; use the on_the_fly strategy";
            throw NumericalError(msg.str());
        }
    }

    OperatorApplier op(spec, grid, mode, strategy);
    op.centers_.resize(N);
    for (std::size_t i = 0; i < N; ++i) op.centers_[i] = grid.center(i);

    const double hn = grid.cell_volume();
    switch (strategy) {
        case Strategy::dense: {
            op.dense_.assign(N * N, 0.0);
            for (std::size_t i = 0; i < N; ++i) {
                for (std::size_t j = 0; j < N; ++j) {
                    if (i != j) op.dense_[i * N + j] = evaluate(spec, op.centers_[i], op.centers_[j]) * hn;
                }
            }
            break;
        }
        case Strategy::fft_convolution: {
            op.convolver_ = std::make_shared<const LatticeConvolver>(grid, [&](const Point& z) {
                const bool origin = z[0] == 0.0 && z[1] == 0.0 && z[2] == 0.0;
                return origin ? 0.0 : evaluate_offset(spec, z) * hn;
            });
            break;
        }
        case Strategy::on_the_fly:
            break;
    }

    const std::vector<double> ones(N, 1.0);
    op.interior_ = op.weighted_sums(ones);

    std::vector<double> tail(N, 0.0);
    if (mode == BoundaryMode::absorbing) tail = tail_mass_all(spec, grid);
    std::vector<double> row(N);
    for (std::size_t i = 0; i < N; ++i) row[i] = op.interior_[i] + tail[i];
    op.tail_ = Field(grid, std::move(tail));
    op.row_sums_ = Field(grid, std::move(row));
    return op;
}

double OperatorApplier::weight(std::size_t i, std::size_t j) const {
    if (i == j) return 0.0;
    if (strategy_ == Strategy::dense) return dense_[i * grid_.cell_count() + j];
    return evaluate(spec_, centers_[i], centers_[j]) * grid_.cell_volume();
}

std::vector<double> OperatorApplier::weighted_sums(std::span<const double> x) const {
    const std::size_t N = grid_.cell_count();
    if (x.size() != N) throw InvalidArgument("weighted_sums input has wrong length");
    std::vector<double> out(N, 0.0);
    switch (strategy_) {
        case Strategy::dense:
            for (std::size_t i = 0; i < N; ++i) {
                const double* row = dense_.data() + i * N;
                double s = 0.0;
                for (std::size_t j = 0; j < N; ++j) s += row[j] * x[j];
                out[i] = s;
            }
            break;
        case Strategy::on_the_fly: {
            const double hn = grid_.cell_volume();
            for (std::size_t i = 0; i < N; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < N; ++j) {
                    if (j != i) s += evaluate(spec_, centers_[i], centers_[j]) * hn * x[j];
                }
                out[i] = s;
            }
            break;
        }
        case Strategy::fft_convolution:
            out = convolver_->apply(x);
            break;
    }
    return out;
}

Field OperatorApplier::apply(const Field& u) const {
    if (!(u.grid() == grid_)) throw InvalidArgument("field grid does not match operator grid");
    const std::vector<double> s = weighted_sums(u.values());
    const auto tail = tail_.values();
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = (s[i] - interior_[i] * u[i]) - tail[i] * u[i];
    }
    return Field(grid_, std::move(out));
}

}  // namespace nlheat
