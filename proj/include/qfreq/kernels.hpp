#pragma once

// Data-parallel inner loops over complex spectral vectors.
//
// Every kernel has a scalar reference implementation and, where the build
// and the CPU allow it, an AVX2/FMA variant. The variant is selected once at
// first use (QFREQ_SIMD=scalar forces the reference path) and can be switched
// explicitly for equivalence testing.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace qfreq::kernels {

using cplx = std::complex<double>;

enum class Backend { kScalar, kAvx2 };

std::string_view to_string(Backend backend);

struct KernelTable {
  cplx (*dot_conj)(const cplx* a, const cplx* b, std::size_t n);
  double (*norm_sq)(const cplx* a, std::size_t n);
  void (*multiply)(const cplx* a, const cplx* b, cplx* out, std::size_t n);
  void (*axpy)(cplx s, const cplx* x, cplx* y, std::size_t n);
};

namespace scalar {
cplx dot_conj(const cplx* a, const cplx* b, std::size_t n);
double norm_sq(const cplx* a, std::size_t n);
void multiply(const cplx* a, const cplx* b, cplx* out, std::size_t n);
void axpy(cplx s, const cplx* x, cplx* y, std::size_t n);
}  // namespace scalar

namespace avx2 {
cplx dot_conj(const cplx* a, const cplx* b, std::size_t n);
double norm_sq(const cplx* a, std::size_t n);
void multiply(const cplx* a, const cplx* b, cplx* out, std::size_t n);
void axpy(cplx s, const cplx* x, cplx* y, std::size_t n);
}  // namespace avx2

bool available(Backend backend);
Backend active_backend();
// Throws std::invalid_argument when the backend is not available here.
void set_backend(Backend backend);
const KernelTable& table(Backend backend);
const KernelTable& active();

// Sum of conj(a[k]) * b[k].
inline cplx dot_conj(std::span<const cplx> a, std::span<const cplx> b) {
  return active().dot_conj(a.data(), b.data(), a.size());
}

inline double norm_sq(std::span<const cplx> a) { return active().norm_sq(a.data(), a.size()); }

inline void multiply(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out) {
  active().multiply(a.data(), b.data(), out.data(), a.size());
}

// y += s * x
inline void axpy(cplx s, std::span<const cplx> x, std::span<cplx> y) {
  active().axpy(s, x.data(), y.data(), x.size());
}

}  // namespace qfreq::kernels
