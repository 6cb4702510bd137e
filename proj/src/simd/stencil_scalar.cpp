#include <cmath>

#include "nlkpp/simd.hpp"

namespace nlkpp::simd::scalar {

void axpy(double* out, double w, const double* in, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::fma(w, in[i], out[i]);
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::fabs(a[i] - b[i]);
    if (d > m) m = d;
  }
  return m;
}

}  // namespace nlkpp::simd::scalar
