#ifndef NLWAVE_FFT_CONVOLVE_HPP
#define NLWAVE_FFT_CONVOLVE_HPP

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <vector>

#include "nlwave/kernel.hpp"

namespace nlwave {

namespace detail {
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}
}  // namespace detail

// Same operator as convolve(), evaluated by zero-padded real FFTs.
inline Field convolve_fft(const DiscreteKernel& k, const Field& u, const Grid& grid, const Closure& bc, double t = 0.0) {
  if (u.size() != grid.size()) fail(ErrorCode::InvalidArgument, "field length does not match grid");
  const std::size_t m = k.half_width();
  const std::vector<double> e = extend(u, grid, bc, m, t);
  const auto& w = k.weights();
  const std::size_t N = detail::next_pow2(e.size() + w.size());
  const std::size_t nc = N / 2 + 1;

  double* a = fftw_alloc_real(N);
  double* b = fftw_alloc_real(N);
  fftw_complex* A = fftw_alloc_complex(nc);
  fftw_complex* B = fftw_alloc_complex(nc);
  fftw_plan pa, pb, pinv;
  {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    pa = fftw_plan_dft_r2c_1d(static_cast<int>(N), a, A, FFTW_ESTIMATE);
    pb = fftw_plan_dft_r2c_1d(static_cast<int>(N), b, B, FFTW_ESTIMATE);
    pinv = fftw_plan_dft_c2r_1d(static_cast<int>(N), A, a, FFTW_ESTIMATE);
  }
  std::fill(a, a + N, 0.0);
  std::fill(b, b + N, 0.0);
  std::copy(e.begin(), e.end(), a);
  std::copy(w.begin(), w.end(), b);
  fftw_execute(pa);
  fftw_execute(pb);
  for (std::size_t i = 0; i < nc; ++i) {
    const std::complex<double> z = std::complex<double>(A[i][0], A[i][1]) * std::complex<double>(B[i][0], B[i][1]);
    A[i][0] = z.real();
    A[i][1] = z.imag();
  }
  fftw_execute(pinv);
  // Full linear convolution index i + 2m holds the stencil sum centred at node i.
  Field out(u.size());
  const double scale = 1.0 / static_cast<double>(N);
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = a[i + 2 * m] * scale;
  {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(pa);
    fftw_destroy_plan(pb);
    fftw_destroy_plan(pinv);
  }
  fftw_free(a);
  fftw_free(b);
  fftw_free(A);
  fftw_free(B);
  return out;
}

enum class ConvolutionPath { direct, fft };

inline Field convolve(const DiscreteKernel& k, const Field& u, const Grid& grid, const Closure& bc, ConvolutionPath path,
                      double t = 0.0) {
  return path == ConvolutionPath::fft ? convolve_fft(k, u, grid, bc, t) : convolve(k, u, grid, bc, t);
}

}  // namespace nlwave

#endif
