// Compiled with -mavx2 -mfma; only called after a runtime CPU check.
#include <immintrin.h>

#include "qfreq/kernels.hpp"

namespace qfreq::kernels::avx2 {
namespace {

inline const double* as_doubles(const cplx* p) { return reinterpret_cast<const double*>(p); }
inline double* as_doubles(cplx* p) { return reinterpret_cast<double*>(p); }

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Lanes hold [re0, im0, re1, im1]; returns (a * b) as complex products.
inline __m256d cmul(__m256d a, __m256d b) {
  const __m256d b_re = _mm256_movedup_pd(b);
  const __m256d b_im = _mm256_permute_pd(b, 0xF);
  const __m256d a_swap = _mm256_permute_pd(a, 0x5);
  return _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(a_swap, b_im));
}

}  // namespace

cplx dot_conj(const cplx* a, const cplx* b, std::size_t n) {
  const double* pa = as_doubles(a);
  const double* pb = as_doubles(b);
  __m256d acc_re = _mm256_setzero_pd();
  __m256d acc_im = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const __m256d va = _mm256_loadu_pd(pa + 2 * k);
    const __m256d vb = _mm256_loadu_pd(pb + 2 * k);
    acc_re = _mm256_fmadd_pd(va, vb, acc_re);
    acc_im = _mm256_fmadd_pd(va, _mm256_permute_pd(vb, 0x5), acc_im);
  }
  // acc_im lanes: [ar*bi, ai*br, ...]
  alignas(32) double im_lanes[4];
  _mm256_store_pd(im_lanes, acc_im);
  double re = hsum(acc_re);
  double im = (im_lanes[0] + im_lanes[2]) - (im_lanes[1] + im_lanes[3]);
  for (; k < n; ++k) {
    re += a[k].real() * b[k].real() + a[k].imag() * b[k].imag();
    im += a[k].real() * b[k].imag() - a[k].imag() * b[k].real();
  }
  return {re, im};
}

double norm_sq(const cplx* a, std::size_t n) {
  const double* pa = as_doubles(a);
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const __m256d va = _mm256_loadu_pd(pa + 2 * k);
    acc = _mm256_fmadd_pd(va, va, acc);
  }
  double total = hsum(acc);
  for (; k < n; ++k) {
    total += a[k].real() * a[k].real() + a[k].imag() * a[k].imag();
  }
  return total;
}

void multiply(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
  const double* pa = as_doubles(a);
  const double* pb = as_doubles(b);
  double* po = as_doubles(out);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    _mm256_storeu_pd(po + 2 * k, cmul(_mm256_loadu_pd(pa + 2 * k), _mm256_loadu_pd(pb + 2 * k)));
  }
  for (; k < n; ++k) {
    const double re = a[k].real() * b[k].real() - a[k].imag() * b[k].imag();
    const double im = a[k].real() * b[k].imag() + a[k].imag() * b[k].real();
    out[k] = {re, im};
  }
}

void axpy(cplx s, const cplx* x, cplx* y, std::size_t n) {
  const double* px = as_doubles(x);
  double* py = as_doubles(y);
  const __m256d vs = _mm256_setr_pd(s.real(), s.imag(), s.real(), s.imag());
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const __m256d prod = cmul(_mm256_loadu_pd(px + 2 * k), vs);
    _mm256_storeu_pd(py + 2 * k, _mm256_add_pd(_mm256_loadu_pd(py + 2 * k), prod));
  }
  for (; k < n; ++k) {
    const double re = s.real() * x[k].real() - s.imag() * x[k].imag();
    const double im = s.real() * x[k].imag() + s.imag() * x[k].real();
    y[k] = {y[k].real() + re, y[k].imag() + im};
  }
}

}  // namespace qfreq::kernels::avx2
