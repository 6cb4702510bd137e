#include <doctest.h>

#include <cstring>
#include <random>
#include <vector>

#include "nlkpp/kernel.hpp"
#include "nlkpp/nonlocal_op.hpp"
#include "nlkpp/simd.hpp"

using namespace nlkpp;

namespace {

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

struct IsaGuard {
  ~IsaGuard() { simd::force_isa(std::nullopt); }
};

}  // namespace

TEST_CASE("scalar axpy") {
  std::vector<double> out{1.0, 2.0, 3.0};
  const std::vector<double> in{1.0, -1.0, 0.5};
  simd::scalar::axpy(out.data(), 2.0, in.data(), 3);
  CHECK(out == std::vector<double>{3.0, 0.0, 4.0});
  CHECK(simd::scalar::max_abs_diff(out.data(), in.data(), 3) == 3.5);
  CHECK(simd::scalar::max_abs_diff(out.data(), in.data(), 0) == 0.0);
}

#if defined(NLKPP_WITH_AVX2)
TEST_CASE("avx2 kernels are bit-identical to the scalar reference") {
  if (!simd::avx2_available()) {
    MESSAGE("CPU lacks AVX2/FMA; equivalence not exercised");
    return;
  }
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (std::size_t n = 0; n < 70; ++n) {
    for (std::size_t shift : {0u, 1u, 3u}) {
      std::vector<double> in(n + shift), base(n + shift);
      for (auto& v : in) v = U(rng) * 1e3;
      for (auto& v : base) v = U(rng);
      const double w = U(rng);
      auto a = base, b = base;
      simd::scalar::axpy(a.data() + shift, w, in.data(), n);
      simd::avx2::axpy(b.data() + shift, w, in.data(), n);
      CHECK(bit_equal(a, b));
      CHECK(simd::scalar::max_abs_diff(a.data(), in.data(), n + shift) ==
            simd::avx2::max_abs_diff(a.data(), in.data(), n + shift));
    }
  }
}

TEST_CASE("operator output does not depend on the ISA") {
  if (!simd::avx2_available()) return;
  IsaGuard guard;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  KernelParams p;
  p.radius = 1.0;
  for (int N : {1, 2}) {
    const auto J = KernelProfile::make(KernelFamily::uniform_ball, p, N);
    auto g = Grid::make(N, 3.0, 0.1);
    NonlocalOperator op(discretize(J, 0.5, 0.1), g, 1.0, ApplyMode::direct);
    Field f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = U(rng);
    simd::force_isa(simd::Isa::scalar);
    CHECK(simd::active_isa() == simd::Isa::scalar);
    const Field s = op.apply(f);
    simd::force_isa(simd::Isa::avx2);
    const Field v = op.apply(f);
    CHECK(bit_equal(s.values(), v.values()));
  }
}
#endif

TEST_CASE("dispatch defaults to the detected ISA") {
  simd::force_isa(std::nullopt);
  CHECK(simd::active_isa() == (simd::avx2_available() ? simd::Isa::avx2 : simd::Isa::scalar));
  if (!simd::avx2_available()) CHECK_THROWS(simd::force_isa(simd::Isa::avx2));
  std::vector<double> out{0.0, 0.0, 0.0, 0.0, 0.0};
  const std::vector<double> in{1.0, 2.0, 3.0, 4.0, 5.0};
  simd::axpy(out.data(), 0.5, in.data(), 5);
  CHECK(out == std::vector<double>{0.5, 1.0, 1.5, 2.0, 2.5});
  CHECK(simd::max_abs_diff(out.data(), in.data(), 5) == 2.5);
}
