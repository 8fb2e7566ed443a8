#pragma once

#include "mss/core/error.hpp"

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <span>
#include <vector>

namespace mss::dsp {

namespace detail {
// FFTW's planner is not re-entrant; execution on distinct plans is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

/// Real-input FFT of fixed size backed by FFTW. One instance per thread.
class RealFft {
public:
    explicit RealFft(int n) : n_(n) {
        if (n < 2) throw InvalidInput("FFT size must be at least 2");
        real_ = fftw_alloc_real(static_cast<std::size_t>(n));
        spec_ = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
        std::lock_guard lock(detail::fftw_planner_mutex());
        forward_ = fftw_plan_dft_r2c_1d(n, real_, spec_, FFTW_ESTIMATE);
        inverse_ = fftw_plan_dft_c2r_1d(n, spec_, real_, FFTW_ESTIMATE);
    }

    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    ~RealFft() {
        std::lock_guard lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(inverse_);
        fftw_free(real_);
        fftw_free(spec_);
    }

    [[nodiscard]] int size() const { return n_; }
    [[nodiscard]] int bins() const { return n_ / 2 + 1; }

    /// out[k] = sum_n in[n] exp(-2 pi i k n / N), k in [0, N/2].
    void forward(std::span<const double> in, std::span<std::complex<double>> out) {
        std::copy(in.begin(), in.end(), real_);
        fftw_execute(forward_);
        for (int k = 0; k < bins(); ++k) out[k] = {spec_[k][0], spec_[k][1]};
    }

    /// Inverse of forward(), including the 1/N normalisation.
    void inverse(std::span<const std::complex<double>> in, std::span<double> out) {
        for (int k = 0; k < bins(); ++k) {
            spec_[k][0] = in[k].real();
            spec_[k][1] = in[k].imag();
        }
        fftw_execute(inverse_);
        const double scale = 1.0 / n_;
        for (int i = 0; i < n_; ++i) out[i] = real_[i] * scale;
    }

private:
    int n_;
    double* real_ = nullptr;
    fftw_complex* spec_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan inverse_ = nullptr;
};

}  // namespace mss::dsp
