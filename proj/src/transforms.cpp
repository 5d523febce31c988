#include "icecsim/transforms.hpp"

#include <mutex>
#include <stdexcept>

namespace icec {

namespace {
std::once_flag g_fftw_once;
}

void fft_init(int threads) {
    std::call_once(g_fftw_once, []() { fftw_init_threads(); });
    fftw_plan_with_nthreads(threads > 0 ? threads : 1);
}

FftPlan plan_fft_axes01(std::complex<double>* data, std::int64_t n1, std::int64_t n2,
                        std::int64_t n3, int sign) {
    fftw_iodim64 dims[2] = {
        {n1, n2 * n3, n2 * n3},
        {n2, n3, n3},
    };
    fftw_iodim64 howmany[1] = {{n3, 1, 1}};
    fftw_plan p = fftw_plan_guru64_dft(2, dims, 1, howmany,
                                       reinterpret_cast<fftw_complex*>(data),
                                       reinterpret_cast<fftw_complex*>(data), sign, FFTW_ESTIMATE);
    if (!p) throw std::runtime_error("plan_fft_axes01: planner failed");
    return FftPlan(p);
}

FftPlan plan_fft_axis0(std::complex<double>* data, std::int64_t n1, std::int64_t n2, int sign) {
    fftw_iodim64 dims[1] = {{n1, n2, n2}};
    fftw_iodim64 howmany[1] = {{n2, 1, 1}};
    fftw_plan p = fftw_plan_guru64_dft(1, dims, 1, howmany,
                                       reinterpret_cast<fftw_complex*>(data),
                                       reinterpret_cast<fftw_complex*>(data), sign, FFTW_ESTIMATE);
    if (!p) throw std::runtime_error("plan_fft_axis0: planner failed");
    return FftPlan(p);
}

FftPlan plan_dst_last_axis(std::complex<double>* data, std::int64_t n_lines, std::int64_t line_len) {
    if (line_len < 3) throw std::invalid_argument("plan_dst_last_axis: line too short");
    double* d = reinterpret_cast<double*>(data);
    fftw_iodim64 dims[1] = {{line_len - 2, 2, 2}};
    fftw_iodim64 howmany[2] = {
        {n_lines, 2 * line_len, 2 * line_len},
        {2, 1, 1},
    };
    fftw_r2r_kind kind = FFTW_RODFT00;
    fftw_plan p = fftw_plan_guru64_r2r(1, dims, 2, howmany, d + 2, d + 2, &kind, FFTW_ESTIMATE);
    if (!p) throw std::runtime_error("plan_dst_last_axis: planner failed");
    return FftPlan(p);
}

} // namespace icec
