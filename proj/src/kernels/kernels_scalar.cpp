#include "qfreq/kernels.hpp"

namespace qfreq::kernels::scalar {

cplx dot_conj(const cplx* a, const cplx* b, std::size_t n) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    re += a[k].real() * b[k].real() + a[k].imag() * b[k].imag();
    im += a[k].real() * b[k].imag() - a[k].imag() * b[k].real();
  }
  return {re, im};
}

double norm_sq(const cplx* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    acc += a[k].real() * a[k].real() + a[k].imag() * a[k].imag();
  }
  return acc;
}

void multiply(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const double re = a[k].real() * b[k].real() - a[k].imag() * b[k].imag();
    const double im = a[k].real() * b[k].imag() + a[k].imag() * b[k].real();
    out[k] = {re, im};
  }
}

void axpy(cplx s, const cplx* x, cplx* y, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const double re = s.real() * x[k].real() - s.imag() * x[k].imag();
    const double im = s.real() * x[k].imag() + s.imag() * x[k].real();
    y[k] = {y[k].real() + re, y[k].imag() + im};
  }
}

}  // namespace qfreq::kernels::scalar
