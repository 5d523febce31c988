#pragma once

#include <fftw3.h>

#include <complex>
#include <cstdint>

namespace icec {

// Process-wide FFTW threading setup; safe to call repeatedly.
void fft_init(int threads);

// RAII wrapper for an fftw_plan.
class FftPlan {
public:
    FftPlan() = default;
    explicit FftPlan(fftw_plan p) : plan_(p) {}
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;
    FftPlan(FftPlan&& o) noexcept : plan_(o.plan_) { o.plan_ = nullptr; }
    FftPlan& operator=(FftPlan&& o) noexcept {
        if (this != &o) {
            destroy();
            plan_ = o.plan_;
            o.plan_ = nullptr;
        }
        return *this;
    }
    ~FftPlan() { destroy(); }

    void execute() const { fftw_execute(plan_); }
    explicit operator bool() const { return plan_ != nullptr; }

private:
    void destroy() {
        if (plan_) fftw_destroy_plan(plan_);
        plan_ = nullptr;
    }
    fftw_plan plan_ = nullptr;
};

// In-place complex FFT over the two leading axes of a (n1, n2, n3) C-order
// array (used for the two electronic axes; n3 is the vector count).
FftPlan plan_fft_axes01(std::complex<double>* data, std::int64_t n1, std::int64_t n2,
                        std::int64_t n3, int sign);

// In-place complex FFT over the leading axis of a (n1, n2) C-order array.
FftPlan plan_fft_axis0(std::complex<double>* data, std::int64_t n1, std::int64_t n2, int sign);

// In-place DST-I (RODFT00) over the interior points of the trailing axis of
// a complex C-order array with n_lines lines of line_len complex entries.
// The first and last entry of each line are Dirichlet boundary values and
// are left untouched (they must stay zero). Forward followed by backward
// multiplies the data by 2*(line_len - 1).
FftPlan plan_dst_last_axis(std::complex<double>* data, std::int64_t n_lines, std::int64_t line_len);

} // namespace icec
