#include <atomic>
#include <stdexcept>

#include "nlkpp/simd.hpp"

namespace nlkpp::simd {

namespace {

Isa detect() {
#if defined(NLKPP_WITH_AVX2)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::avx2;
#endif
  return Isa::scalar;
}

const Isa detected = detect();
std::atomic<Isa> current{detected};

}  // namespace

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool avx2_available() { return detected == Isa::avx2; }

Isa active_isa() { return current.load(std::memory_order_relaxed); }

void force_isa(std::optional<Isa> isa) {
  if (!isa) {
    current.store(detected);
    return;
  }
  if (*isa == Isa::avx2 && !avx2_available()) {
    throw std::invalid_argument("avx2 path not available on this build or CPU");
  }
  current.store(*isa);
}

void axpy(double* out, double w, const double* in, std::size_t n) {
#if defined(NLKPP_WITH_AVX2)
  if (active_isa() == Isa::avx2) return avx2::axpy(out, w, in, n);
#endif
  scalar::axpy(out, w, in, n);
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
#if defined(NLKPP_WITH_AVX2)
  if (active_isa() == Isa::avx2) return avx2::max_abs_diff(a, b, n);
#endif
  return scalar::max_abs_diff(a, b, n);
}

}  // namespace nlkpp::simd
