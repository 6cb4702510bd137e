#include "nlkpp/parallel.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace nlkpp {

void set_thread_count(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int thread_count() { return omp_get_max_threads(); }

int thread_count_from_env() {
  const char* s = std::getenv("NONLOCAL_KPP_THREADS");
  if (s == nullptr) return 0;
  try {
    const int n = std::stoi(s);
    return n > 0 ? n : 0;
  } catch (...) {
    return 0;
  }
}

namespace {

double pairwise(const double* p, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += p[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise(p, half) + pairwise(p + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> v) { return pairwise(v.data(), v.size()); }

}  // namespace nlkpp
