#pragma once

#include <cstddef>
#include <optional>

namespace nlkpp::simd {

enum class Isa { scalar, avx2 };

const char* isa_name(Isa isa);

/// True when the AVX2 path was compiled in and the CPU supports AVX2 and FMA.
bool avx2_available();

/// ISA used by the dispatched entry points below.
Isa active_isa();

/// Overrides runtime detection (tests, benchmarking). std::nullopt restores it.
/// Forcing an unavailable ISA throws std::invalid_argument.
void force_isa(std::optional<Isa> isa);

/// out[i] += w * in[i], fused multiply-add per element.
void axpy(double* out, double w, const double* in, std::size_t n);

/// max_i |a[i] - b[i]|, 0 for n == 0.
double max_abs_diff(const double* a, const double* b, std::size_t n);

namespace scalar {
void axpy(double* out, double w, const double* in, std::size_t n);
double max_abs_diff(const double* a, const double* b, std::size_t n);
}  // namespace scalar

#if defined(NLKPP_WITH_AVX2)
namespace avx2 {
void axpy(double* out, double w, const double* in, std::size_t n);
double max_abs_diff(const double* a, const double* b, std::size_t n);
}  // namespace avx2
#endif

}  // namespace nlkpp::simd
