#pragma once

#include <cstddef>
#include <span>

namespace nlkpp {

/// Caps the number of worker threads used by internal parallel loops.
/// Results never depend on this value.
void set_thread_count(int n);
int thread_count();

/// Reads NONLOCAL_KPP_THREADS; returns 0 when unset or invalid.
int thread_count_from_env();

/// Pairwise (tree) summation with a fixed split order, independent of threads.
double pairwise_sum(std::span<const double> v);

}  // namespace nlkpp
