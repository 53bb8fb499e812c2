#include "nlheat/convolution.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <mutex>

#include "nlheat/errors.hpp"

namespace nlheat {

namespace {

// FFTW planning and plan destruction are not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

using RealBuffer = std::unique_ptr<double, FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex, FftwFree>;

RealBuffer alloc_real(std::size_t n) {
    return RealBuffer(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
}

ComplexBuffer alloc_complex(std::size_t n) {
    return ComplexBuffer(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
}

}  // namespace

struct LatticeConvolver::Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

LatticeConvolver::LatticeConvolver(const Grid& grid, const Stencil& stencil)
    : grid_(grid), padded_(2 * grid.points_per_axis()), plans_(std::make_unique<Plans>()) {
    const int dim = grid.dimension();
    const std::size_t M = grid.points_per_axis();
    const double h = grid.spacing();

    real_count_ = 1;
    int dims[3] = {1, 1, 1};
    for (int d = 0; d < dim; ++d) {
        real_count_ *= padded_;
        dims[d] = static_cast<int>(padded_);
    }
    freq_count_ = real_count_ / padded_ * (padded_ / 2 + 1);

    RealBuffer real = alloc_real(real_count_);
    ComplexBuffer spectrum = alloc_complex(freq_count_);
    {
        std::lock_guard lock(planner_mutex());
        // FFTW_ESTIMATE keeps plans (and hence results) reproducible run to run.
        plans_->forward = fftw_plan_dft_r2c(dim, dims, real.get(), spectrum.get(), FFTW_ESTIMATE);
        plans_->backward = fftw_plan_dft_c2r(dim, dims, spectrum.get(), real.get(), FFTW_ESTIMATE);
    }
    if (plans_->forward == nullptr || plans_->backward == nullptr) {
        throw NumericalError("FFTW planning failed");
    }

    // Wrap offsets k in [-(M-1), M-1] into [0, 2M).
    std::fill(real.get(), real.get() + real_count_, 0.0);
    const long span = static_cast<long>(M) - 1;
    std::array<long, 3> k{0, 0, 0};
    std::array<long, 3> lo{0, 0, 0};
    std::array<long, 3> hi{0, 0, 0};
    for (int d = 0; d < dim; ++d) {
        lo[d] = -span;
        hi[d] = span;
    }
    for (k[0] = lo[0]; k[0] <= hi[0]; ++k[0]) {
        for (k[1] = lo[1]; k[1] <= hi[1]; ++k[1]) {
            for (k[2] = lo[2]; k[2] <= hi[2]; ++k[2]) {
                Point offset{0.0, 0.0, 0.0};
                std::size_t flat = 0;
                for (int d = 0; d < dim; ++d) {
                    offset[d] = static_cast<double>(k[d]) * h;
                    const long wrapped = k[d] < 0 ? k[d] + static_cast<long>(padded_) : k[d];
                    flat = flat * padded_ + static_cast<std::size_t>(wrapped);
                }
                real.get()[flat] = stencil(offset);
            }
        }
    }
    fftw_execute_dft_r2c(plans_->forward, real.get(), spectrum.get());
    const double scale = 1.0 / static_cast<double>(real_count_);
    kernel_hat_.resize(freq_count_);
    for (std::size_t i = 0; i < freq_count_; ++i) {
        kernel_hat_[i] = std::complex<double>(spectrum.get()[i][0], spectrum.get()[i][1]) * scale;
    }
}

LatticeConvolver::~LatticeConvolver() {
    std::lock_guard lock(planner_mutex());
    if (plans_->forward) fftw_destroy_plan(plans_->forward);
    if (plans_->backward) fftw_destroy_plan(plans_->backward);
}

std::vector<double> LatticeConvolver::apply(std::span<const double> u) const {
    if (u.size() != grid_.cell_count()) throw InvalidArgument("convolution input has wrong length");
    const int dim = grid_.dimension();

    RealBuffer real = alloc_real(real_count_);
    ComplexBuffer spectrum = alloc_complex(freq_count_);
    std::fill(real.get(), real.get() + real_count_, 0.0);

    auto padded_flat = [&](std::size_t cell) {
        const auto idx = grid_.multi_index(cell);
        std::size_t flat = 0;
        for (int d = 0; d < dim; ++d) flat = flat * padded_ + idx[d];
        return flat;
    };
    for (std::size_t i = 0; i < u.size(); ++i) real.get()[padded_flat(i)] = u[i];

    fftw_execute_dft_r2c(plans_->forward, real.get(), spectrum.get());
    for (std::size_t i = 0; i < freq_count_; ++i) {
        const std::complex<double> z(spectrum.get()[i][0], spectrum.get()[i][1]);
        const std::complex<double> prod = z * kernel_hat_[i];
        spectrum.get()[i][0] = prod.real();
        spectrum.get()[i][1] = prod.imag();
    }
    fftw_execute_dft_c2r(plans_->backward, spectrum.get(), real.get());

    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = real.get()[padded_flat(i)];
    return out;
}

}  // namespace nlheat
