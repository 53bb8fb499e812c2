#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nlheat/grid.hpp"
#include "nlheat/kernels.hpp"

namespace nlheat {

class LatticeConvolver;

enum class BoundaryMode { conservative, absorbing };
enum class Strategy { dense, on_the_fly, fft_convolution };

std::string to_string(BoundaryMode mode);
std::string to_string(Strategy strategy);
BoundaryMode parse_boundary_mode(const std::string& name);
Strategy parse_strategy(const std::string& name);

inline constexpr std::size_t kDefaultDenseBudgetBytes = std::size_t{1} << 30;

/**
 * Discrete nonlocal operator
 *
 *   (Lu)_i = sum_{j != i} w_ij (u_j - u_i) - tail_i u_i,   w_ij = J(x_i, x_j) h^n.
 *
 * conservative mode keeps tail = 0 (symmetric, mass preserving); absorbing
 * mode charges each cell the kernel mass that lies outside the box, which
 * models u = 0 beyond the truncation. The interior row sums are produced by
 * the same summation routine as apply(), so apply(1) is exactly -tail.
 */
class OperatorApplier {
public:
    static OperatorApplier assemble(const KernelSpec& spec, const Grid& grid, BoundaryMode mode,
                                    Strategy strategy,
                                    std::size_t dense_budget_bytes = kDefaultDenseBudgetBytes);

    Field apply(const Field& u) const;

    // D_i = sum_{j != i} w_ij + tail_i.
    const Field& row_sums() const { return row_sums_; }
    const Field& tail() const { return tail_; }
    std::span<const double> interior_row_sums() const { return interior_; }

    // w_ij, zero on the diagonal.
    double weight(std::size_t i, std::size_t j) const;

    // s_i = sum_{j != i} w_ij x_j.
    std::vector<double> weighted_sums(std::span<const double> x) const;

    const Grid& grid() const { return grid_; }
    const KernelSpec& spec() const { return spec_; }
    BoundaryMode boundary_mode() const { return mode_; }
    Strategy strategy() const { return strategy_; }

private:
    OperatorApplier(const KernelSpec& spec, const Grid& grid, BoundaryMode mode, Strategy strategy);

    KernelSpec spec_;
    Grid grid_;
    BoundaryMode mode_;
    Strategy strategy_;
    std::vector<Point> centers_;
    std::vector<double> interior_;
    std::vector<double> dense_;  // row-major N x N, dense strategy only
    std::shared_ptr<const LatticeConvolver> convolver_;
    Field row_sums_;
    Field tail_;
};

}  // namespace nlheat
