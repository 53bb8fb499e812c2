#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "nlheat/grid.hpp"

namespace nlheat {

/**
 * Linear (non-periodic) lattice convolution out_i = sum_j K(x_i - x_j) u_j.
 *
 * The stencil is sampled on offsets k h with |k_d| <= M - 1, zero-padded to
 * 2M per axis and transformed once. apply() allocates its own work buffers,
 * so concurrent calls on one instance are safe.
 */
class LatticeConvolver {
public:
    using Stencil = std::function<double(const Point& offset)>;

    LatticeConvolver(const Grid& grid, const Stencil& stencil);
    ~LatticeConvolver();
    LatticeConvolver(const LatticeConvolver&) = delete;
    LatticeConvolver& operator=(const LatticeConvolver&) = delete;

    std::vector<double> apply(std::span<const double> u) const;

    const Grid& grid() const { return grid_; }

private:
    struct Plans;

    Grid grid_;
    std::size_t padded_;       // points per padded axis
    std::size_t real_count_;   // padded_^n
    std::size_t freq_count_;   // r2c output length
    std::vector<std::complex<double>> kernel_hat_;
    std::unique_ptr<Plans> plans_;
};

}  // namespace nlheat
