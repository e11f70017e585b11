#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "qfreq/kernels.hpp"

namespace qfreq::kernels {
namespace {

constexpr KernelTable kScalarTable{scalar::dot_conj, scalar::norm_sq, scalar::multiply, scalar::axpy};
#if defined(QFREQ_WITH_AVX2)
constexpr KernelTable kAvx2Table{avx2::dot_conj, avx2::norm_sq, avx2::multiply, avx2::axpy};
#endif

bool cpu_has_avx2() {
#if defined(QFREQ_WITH_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return supported;
#else
  return false;
#endif
}

Backend initial_backend() {
  if (const char* env = std::getenv("QFREQ_SIMD")) {
    if (std::string(env) == "scalar") return Backend::kScalar;
  }
  return cpu_has_avx2() ? Backend::kAvx2 : Backend::kScalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> backend{initial_backend()};
  return backend;
}

}  // namespace

std::string_view to_string(Backend backend) {
  return backend == Backend::kAvx2 ? "avx2" : "scalar";
}

bool available(Backend backend) {
  return backend == Backend::kScalar || cpu_has_avx2();
}

Backend active_backend() { return current().load(std::memory_order_relaxed); }

void set_backend(Backend backend) {
  if (!available(backend)) {
    throw std::invalid_argument("kernel backend not available: " + std::string(to_string(backend)));
  }
  current().store(backend, std::memory_order_relaxed);
}

const KernelTable& table(Backend backend) {
#if defined(QFREQ_WITH_AVX2)
  if (backend == Backend::kAvx2 && cpu_has_avx2()) return kAvx2Table;
#endif
  (void)backend;
  return kScalarTable;
}

const KernelTable& active() { return table(active_backend()); }

}  // namespace qfreq::kernels
