#include "nlkpp/nonlocal_op.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

#include "nlkpp/simd.hpp"

namespace nlkpp {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// smallest 2^a 3^b 5^c >= n
std::size_t good_fft_size(std::size_t n) {
  std::size_t best = 1;
  while (best < n) best *= 2;
  for (std::size_t p5 = 1; p5 < best; p5 *= 5) {
    for (std::size_t p3 = p5; p3 < best; p3 *= 3) {
      std::size_t v = p3;
      while (v < n) v *= 2;
      best = std::min(best, v);
    }
  }
  return best;
}

constexpr std::size_t kBlock = 4096;

}  // namespace

const char* mode_name(ApplyMode m) {
  switch (m) {
    case ApplyMode::direct: return "direct";
    case ApplyMode::fft: return "fft";
    case ApplyMode::automatic: return "auto";
  }
  return "?";
}

ApplyMode parse_apply_mode(const std::string& s) {
  if (s == "direct") return ApplyMode::direct;
  if (s == "fft") return ApplyMode::fft;
  if (s == "auto") return ApplyMode::automatic;
  throw std::invalid_argument("unknown apply mode '" + s + "' (direct, fft, auto)");
}

struct NonlocalOperator::FftPlan {
  int dim = 1;
  std::size_t L = 0;         // padded length per axis
  std::size_t spectrum = 0;  // complex coefficients
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  std::vector<std::complex<double>> kernel_hat;

  ~FftPlan() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

NonlocalOperator::NonlocalOperator(DiscreteKernel kernel, GridPtr grid, double m, ApplyMode mode)
    : kernel_(std::move(kernel)), grid_(std::move(grid)), m_(m), mode_(mode) {
  if (!grid_) throw std::invalid_argument("operator needs a grid");
  if (kernel_.dim != grid_->dim()) throw std::invalid_argument("kernel and grid dimensions differ");
  if (std::fabs(kernel_.spacing - grid_->spacing()) > 1e-12 * grid_->spacing()) {
    throw std::invalid_argument("kernel spacing differs from grid spacing");
  }
  if (!(m >= 0.0 && m <= 2.0)) throw std::invalid_argument("cost exponent m must lie in [0, 2]");
  rate_ = std::pow(kernel_.epsilon, -m_);
  const int K = kernel_.half_width;
  if (kernel_.dim == 1) {
    for (int d = -K; d <= K; ++d) {
      if (kernel_.at(d) != 0.0) taps_.push_back({d, 0, kernel_.at(d)});
    }
  } else {
    for (int a = -K; a <= K; ++a) {
      for (int b = -K; b <= K; ++b) {
        if (kernel_.at(a, b) != 0.0) taps_.push_back({a, b, kernel_.at(a, b)});
      }
    }
  }
  if (mode_ == ApplyMode::automatic) {
    const double n = static_cast<double>(grid_->size());
    const double direct_cost = n * static_cast<double>(taps_.size());
    const double side = 2.0 * grid_->half_extent() + 1.0 + K;
    const double fft_points = kernel_.dim == 1 ? side : side * side;
    const double fft_cost = 12.0 * fft_points * std::log2(std::max(2.0, fft_points));
    mode_ = (taps_.size() > 64 && direct_cost > fft_cost) ? ApplyMode::fft : ApplyMode::direct;
  }
  if (mode_ == ApplyMode::fft) {
    auto plan = std::make_unique<FftPlan>();
    plan->dim = kernel_.dim;
    const std::size_t box = static_cast<std::size_t>(2 * grid_->half_extent() + 1);
    plan->L = good_fft_size(box + static_cast<std::size_t>(K));
    const std::size_t L = plan->L;
    const std::size_t real_size = plan->dim == 1 ? L : L * L;
    plan->spectrum = plan->dim == 1 ? L / 2 + 1 : L * (L / 2 + 1);
    double* rbuf = fftw_alloc_real(real_size);
    fftw_complex* cbuf = fftw_alloc_complex(plan->spectrum);
    {
      std::lock_guard<std::mutex> lock(planner_mutex());
      const int n = static_cast<int>(L);
      if (plan->dim == 1) {
        plan->forward = fftw_plan_dft_r2c_1d(n, rbuf, cbuf, FFTW_ESTIMATE);
        plan->backward = fftw_plan_dft_c2r_1d(n, cbuf, rbuf, FFTW_ESTIMATE);
      } else {
        plan->forward = fftw_plan_dft_r2c_2d(n, n, rbuf, cbuf, FFTW_ESTIMATE);
        plan->backward = fftw_plan_dft_c2r_2d(n, n, cbuf, rbuf, FFTW_ESTIMATE);
      }
    }
    std::fill(rbuf, rbuf + real_size, 0.0);
    auto wrap = [L](int d) { return static_cast<std::size_t>((d % static_cast<long>(L) + static_cast<long>(L)) % static_cast<long>(L)); };
    for (const auto& t : taps_) {
      const std::size_t idx = plan->dim == 1 ? wrap(t.di) : wrap(t.di) * L + wrap(t.dj);
      rbuf[idx] = t.w;
    }
    fftw_execute_dft_r2c(plan->forward, rbuf, cbuf);
    plan->kernel_hat.resize(plan->spectrum);
    for (std::size_t i = 0; i < plan->spectrum; ++i) plan->kernel_hat[i] = {cbuf[i][0], cbuf[i][1]};
    fftw_free(rbuf);
    fftw_free(cbuf);
    fft_ = std::move(plan);
  }
  std::vector<double> ones(grid_->size(), 1.0);
  inside_mass_.assign(grid_->size(), 0.0);
  convolve_direct(ones.data(), inside_mass_.data());
}

NonlocalOperator::~NonlocalOperator() = default;

void NonlocalOperator::convolve(const double* in, double* out) const {
  if (mode_ == ApplyMode::fft) {
    convolve_fft(in, out);
  } else {
    convolve_direct(in, out);
  }
}

void NonlocalOperator::convolve_direct(const double* in, double* out) const {
  const Grid& g = *grid_;
  const std::size_t n = g.size();
  if (g.dim() == 1) {
    const long size = static_cast<long>(n);
    const long blocks = (size + static_cast<long>(kBlock) - 1) / static_cast<long>(kBlock);
#pragma omp parallel for schedule(static)
    for (long b = 0; b < blocks; ++b) {
      const long lo = b * static_cast<long>(kBlock);
      const long hi = std::min(size, lo + static_cast<long>(kBlock));
      std::fill(out + lo, out + hi, 0.0);
      for (const auto& t : taps_) {
        // out[x] += w * in[x + d]
        const long s = std::max(lo, -static_cast<long>(t.di));
        const long e = std::min(hi, size - t.di);
        if (e > s) simd::axpy(out + s, t.w, in + s + t.di, static_cast<std::size_t>(e - s));
      }
    }
    return;
  }
  const int M = g.half_extent();
#pragma omp parallel for schedule(dynamic, 4)
  for (int i = -M; i <= M; ++i) {
    const int Ji = g.row_half(i);
    double* orow = out + g.row_start(i);
    std::fill(orow, orow + (2 * Ji + 1), 0.0);
    for (const auto& t : taps_) {
      const int ip = i + t.di;
      if (ip < -M || ip > M) continue;
      const int Jp = g.row_half(ip);
      const int j0 = std::max(-Ji, -Jp - t.dj);
      const int j1 = std::min(Ji, Jp - t.dj);
      if (j1 < j0) continue;
      const double* irow = in + g.row_start(ip);
      simd::axpy(orow + (j0 + Ji), t.w, irow + (j0 + t.dj + Jp), static_cast<std::size_t>(j1 - j0 + 1));
    }
  }
}

void NonlocalOperator::convolve_fft(const double* in, double* out) const {
  const Grid& g = *grid_;
  const FftPlan& p = *fft_;
  const std::size_t L = p.L;
  const std::size_t real_size = p.dim == 1 ? L : L * L;
  double* rbuf = fftw_alloc_real(real_size);
  fftw_complex* cbuf = fftw_alloc_complex(p.spectrum);
  std::fill(rbuf, rbuf + real_size, 0.0);
  const int M = g.half_extent();
  if (p.dim == 1) {
    std::copy(in, in + g.size(), rbuf);
  } else {
    for (int i = -M; i <= M; ++i) {
      const int Ji = g.row_half(i);
      const double* row = in + g.row_start(i);
      double* dst = rbuf + static_cast<std::size_t>(i + M) * L + static_cast<std::size_t>(M - Ji);
      std::copy(row, row + (2 * Ji + 1), dst);
    }
  }
  fftw_execute_dft_r2c(p.forward, rbuf, cbuf);
  for (std::size_t i = 0; i < p.spectrum; ++i) {
    const std::complex<double> v(cbuf[i][0], cbuf[i][1]);
    const std::complex<double> r = v * p.kernel_hat[i];
    cbuf[i][0] = r.real();
    cbuf[i][1] = r.imag();
  }
  fftw_execute_dft_c2r(p.backward, cbuf, rbuf);
  const double scale = 1.0 / static_cast<double>(real_size);
  if (p.dim == 1) {
    for (std::size_t k = 0; k < g.size(); ++k) out[k] = rbuf[k] * scale;
  } else {
    for (int i = -M; i <= M; ++i) {
      const int Ji = g.row_half(i);
      double* row = out + g.row_start(i);
      const double* src = rbuf + static_cast<std::size_t>(i + M) * L + static_cast<std::size_t>(M - Ji);
      for (int j = 0; j < 2 * Ji + 1; ++j) row[j] = src[j] * scale;
    }
  }
  fftw_free(rbuf);
  fftw_free(cbuf);
}

Field NonlocalOperator::convolve(const Field& phi) const {
  require_same_grid(phi, Field(grid_), "convolve");
  Field out(grid_);
  convolve(phi.data(), out.data());
  return out;
}

Field NonlocalOperator::apply(const Field& phi) const {
  require_same_grid(phi, Field(grid_), "apply");
  Field out(grid_);
  convolve(phi.data(), out.data());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = rate_ * (out[i] - phi[i]);
  return out;
}

bool NonlocalOperator::interior(std::size_t n) const {
  const auto [i, j] = grid_->index(n);
  const int K = kernel_.half_width;
  if (grid_->dim() == 1) return grid_->contains(i - K) && grid_->contains(i + K);
  for (int a : {-K, K}) {
    for (int b : {-K, K}) {
      if (!grid_->contains(i + a, j + b)) return false;
    }
  }
  return true;
}

Field kpp_residual(const NonlocalOperator& op, const Field& u, const Field& a) {
  require_same_grid(u, a, "kpp_residual");
  Field r = op.apply(u);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += u[i] * (a[i] - u[i]);
  return r;
}

double second_difference_form(const NonlocalOperator& op, const KernelProfile& J, const Field& u,
                              std::size_t n) {
  const double m = op.m();
  const double Mm = moment(J, m);
  if (!std::isfinite(Mm)) throw std::invalid_argument("second-difference form needs a finite m-th moment");
  const Grid& g = *op.grid();
  const DiscreteKernel& k = op.kernel();
  const double h = g.spacing();
  const auto [i, j] = g.index(n);
  auto value = [&](int a, int b) {
    const long idx = g.find(a, b);
    return idx < 0 ? 0.0 : u[static_cast<std::size_t>(idx)];
  };
  const double ux = u[n];
  const int K = k.half_width;
  const double eps_m = std::pow(k.epsilon, -m);
  double sum = 0.0;
  for (int a = -K; a <= K; ++a) {
    for (int b = (g.dim() == 1 ? 0 : -K); b <= (g.dim() == 1 ? 0 : K); ++b) {
      if (a == 0 && b == 0) continue;
      const double w = g.dim() == 1 ? k.at(a) : k.at(a, b);
      if (w == 0.0) continue;
      const double dist = std::pow(std::hypot(a * h, b * h), m);
      const double rho = eps_m * dist * w / Mm;
      const double d2 = value(i + a, j + b) - 2.0 * ux + value(i - a, j - b);
      sum += rho * d2 / dist;
    }
  }
  return 0.5 * Mm * sum;
}

}  // namespace nlkpp
