#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <memory>

namespace ftfi::detail {

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

using RealBuffer = std::unique_ptr<double[], FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

inline RealBuffer make_real_buffer(std::size_t n)
{
    return RealBuffer(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
}

inline ComplexBuffer make_complex_buffer(std::size_t n)
{
    return ComplexBuffer(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
}

/// Real-to-complex / complex-to-real plan pair of one length. Plans are made
/// once (planning is not thread-safe); execution on fresh fftw_malloc'd
/// buffers is.
class RealFft {
public:
    explicit RealFft(std::size_t n);
    ~RealFft();
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    std::size_t size() const { return n_; }
    std::size_t spectrum_size() const { return n_ / 2 + 1; }

    void forward(double* in, fftw_complex* out) const { fftw_execute_dft_r2c(forward_, in, out); }
    /// Unnormalized: the result is n times the inverse transform.
    void backward(fftw_complex* in, double* out) const { fftw_execute_dft_c2r(backward_, in, out); }

private:
    std::size_t n_;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

} // namespace ftfi::detail
