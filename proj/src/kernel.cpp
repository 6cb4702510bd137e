#include "nlkpp/kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "nlkpp/io.hpp"
#include "nlkpp/parallel.hpp"
#include "nlkpp/quadrature.hpp"

namespace nlkpp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dim(int dim) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("kernel dimension must be 1 or 2");
}

// int_lo^hi g(r) dr for a radial integrand; hi may be infinite. Pieces beyond
// r = 1 go through the inversion rule so algebraic tails stay accurate.
double radial_integral(const quad::Integrand& g, double lo, double hi,
                       const std::vector<double>& cuts, double tol = 1e-13) {
  if (!(hi > lo)) return 0.0;
  if (std::isinf(hi)) {
    const double split = std::max(lo, 1.0);
    return quad::integrate(g, lo, split, cuts, tol) + quad::integrate_to_infinity(g, split, tol);
  }
  return quad::integrate(g, lo, hi, cuts, tol);
}

}  // namespace

const char* family_name(KernelFamily f) {
  switch (f) {
    case KernelFamily::uniform_ball: return "uniform_ball";
    case KernelFamily::triangle: return "triangle";
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::power_tail: return "power_tail";
    case KernelFamily::custom: return "custom";
  }
  return "?";
}

KernelFamily parse_kernel_family(const std::string& s) {
  for (auto f : {KernelFamily::uniform_ball, KernelFamily::triangle, KernelFamily::gaussian,
                 KernelFamily::power_tail, KernelFamily::custom}) {
    if (s == family_name(f)) return f;
  }
  throw std::invalid_argument("unknown kernel family '" + s + "'");
}

double KernelProfile::raw(double r) const {
  switch (family_) {
    case KernelFamily::uniform_ball: return r <= params_.radius ? 1.0 : 0.0;
    case KernelFamily::triangle: return std::max(0.0, 1.0 - r / params_.radius);
    case KernelFamily::gaussian: return std::exp(-0.5 * r * r / (params_.sigma * params_.sigma));
    case KernelFamily::power_tail: return std::pow(1.0 + r, -(dim_ + params_.alpha));
    case KernelFamily::custom: return r <= support_ ? custom_(r) : 0.0;
  }
  return 0.0;
}

double KernelProfile::sphere_area() const { return dim_ == 1 ? 2.0 : 2.0 * std::numbers::pi; }

std::vector<double> KernelProfile::breakpoints() const {
  std::vector<double> b{0.0};
  if (compact()) b.push_back(support_);
  return b;
}

double KernelProfile::core_radius() const {
  switch (family_) {
    case KernelFamily::uniform_ball:
    case KernelFamily::triangle: return params_.radius;
    case KernelFamily::gaussian: return params_.sigma;
    case KernelFamily::power_tail: return 1.0;
    case KernelFamily::custom: return compact() ? std::min(1.0, support_) : 1.0;
  }
  return 1.0;
}

double KernelProfile::raw_mass() const {
  const int n = dim_;
  auto g = [this, n](double r) { return raw(r) * (n == 1 ? 1.0 : r); };
  return sphere_area() * radial_integral(g, 0.0, support_, breakpoints());
}

KernelProfile KernelProfile::make(KernelFamily family, const KernelParams& p, int dim) {
  check_dim(dim);
  KernelProfile k;
  k.family_ = family;
  k.params_ = p;
  k.dim_ = dim;
  switch (family) {
    case KernelFamily::uniform_ball:
    case KernelFamily::triangle:
      if (!(p.radius > 0.0) || !std::isfinite(p.radius)) throw std::invalid_argument("kernel radius must be positive");
      k.support_ = p.radius;
      break;
    case KernelFamily::gaussian:
      if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) throw std::invalid_argument("kernel sigma must be positive");
      k.support_ = kInf;
      break;
    case KernelFamily::power_tail:
      if (!(p.alpha > 0.0) || !std::isfinite(p.alpha)) throw std::invalid_argument("power_tail alpha must be positive");
      k.support_ = kInf;
      k.divergence_order_ = p.alpha;
      break;
    case KernelFamily::custom:
      throw std::invalid_argument("use KernelProfile::custom for custom profiles");
  }
  k.norm_ = 1.0 / k.raw_mass();
  return k;
}

KernelProfile KernelProfile::custom(std::function<double(double)> profile, int dim, double support_radius,
                                    std::optional<double> tail_alpha) {
  check_dim(dim);
  if (!profile) throw std::invalid_argument("custom kernel needs a profile");
  if (!(support_radius > 0.0)) throw std::invalid_argument("custom kernel support must be positive");
  KernelProfile k;
  k.family_ = KernelFamily::custom;
  k.dim_ = dim;
  k.support_ = support_radius;
  k.custom_ = std::move(profile);
  if (std::isinf(support_radius)) {
    if (!tail_alpha || !(*tail_alpha > 0.0)) {
      throw std::invalid_argument("unbounded custom kernel needs a positive tail exponent (mass not integrable)");
    }
    k.divergence_order_ = *tail_alpha;
    k.params_.alpha = *tail_alpha;
  }
  for (double r : {0.0, 0.25 * k.core_radius(), k.core_radius()}) {
    if (k.raw(r) < 0.0) throw std::invalid_argument("custom kernel profile must be nonnegative");
  }
  const double mass = k.raw_mass();
  if (!std::isfinite(mass) || !(mass > 0.0)) throw std::invalid_argument("custom kernel mass is not integrable");
  k.norm_ = 1.0 / mass;
  return k;
}

double moment(const KernelProfile& J, double beta) {
  if (!(beta >= 0.0)) throw std::invalid_argument("moment order must be nonnegative");
  if (beta >= J.divergence_order()) return kInf;
  const int n = J.dim();
  auto g = [&J, beta, n](double r) { return J(r) * std::pow(r, beta + n - 1); };
  return J.sphere_area() * radial_integral(g, 0.0, J.support_radius(), J.breakpoints());
}

double truncated_moment(const KernelProfile& J, double beta, double cutoff) {
  if (!(beta >= 0.0)) throw std::invalid_argument("moment order must be nonnegative");
  const int n = J.dim();
  const double hi = std::min(cutoff, J.support_radius());
  auto cuts = J.breakpoints();
  if (hi <= 1.0) {
    auto g = [&J, beta, n](double r) { return J(r) * std::pow(r, beta + n - 1); };
    return J.sphere_area() * quad::integrate(g, 0.0, hi, cuts, 1e-13);
  }
  // log variable on [1, hi] keeps very long ranges resolved
  auto g = [&J, beta, n](double r) { return J(r) * std::pow(r, beta + n - 1); };
  auto gl = [&J, beta, n](double s) {
    const double r = std::exp(s);
    return J(r) * std::pow(r, beta + n);
  };
  std::vector<double> lcuts;
  for (double c : cuts) {
    if (c > 1.0) lcuts.push_back(std::log(c));
  }
  return J.sphere_area() *
         (quad::integrate(g, 0.0, 1.0, cuts, 1e-13) + quad::integrate(gl, 0.0, std::log(hi), lcuts, 1e-13));
}

double tail_mass(const KernelProfile& J, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("tail radius must be positive");
  if (radius >= J.support_radius()) return 0.0;
  const int n = J.dim();
  auto g = [&J, n](double r) { return J(r) * (n == 1 ? 1.0 : r); };
  double t = 0.0;
  if (std::isinf(J.support_radius())) {
    t = J.sphere_area() * quad::integrate_to_infinity(g, radius, 1e-13);
  } else {
    t = J.sphere_area() * quad::integrate(g, radius, J.support_radius(), J.breakpoints(), 1e-13);
  }
  return std::clamp(t, 0.0, 1.0);
}

double DiscreteKernel::total() const { return pairwise_sum(weights); }

namespace {

// Integral of J over the square [x0,x1] x [y0,y1] (kernel units).
double cell_integral_2d(const KernelProfile& J, double x0, double x1, double y0, double y1) {
  const double S = J.support_radius();
  auto inner = [&](double x) {
    std::array<double, 3> cuts{0.0, kInf, kInf};
    if (std::isfinite(S) && std::fabs(x) < S) {
      const double c = std::sqrt(S * S - x * x);
      cuts[1] = c;
      cuts[2] = -c;
    }
    auto f = [&](double y) { return J(std::hypot(x, y)); };
    return quad::integrate(f, y0, y1, cuts, 1e-12);
  };
  std::vector<double> outer_cuts{0.0};
  if (std::isfinite(S)) {
    outer_cuts.push_back(S);
    outer_cuts.push_back(-S);
    for (double y : {y0, y1}) {
      if (std::fabs(y) < S) {
        const double c = std::sqrt(S * S - y * y);
        outer_cuts.push_back(c);
        outer_cuts.push_back(-c);
      }
    }
  }
  return quad::integrate(inner, x0, x1, outer_cuts, 1e-12);
}

}  // namespace

DiscreteKernel discretize(const KernelProfile& J, double epsilon, double h, std::optional<double> cutoff) {
  if (!(epsilon > 0.0) || !(h > 0.0)) throw std::invalid_argument("epsilon and spacing must be positive");
  const double cells_across_core = J.core_radius() * epsilon / h;
  if (cells_across_core < 4.0 - 1e-9) {
    throw std::invalid_argument("lattice too coarse: " + format_double(cells_across_core) +
                                " cells across the kernel core, need at least 4");
  }
  DiscreteKernel dk;
  dk.dim = J.dim();
  dk.epsilon = epsilon;
  dk.spacing = h;
  const double s = h / epsilon;  // cell width in kernel units
  double target = 1.0;
  double reach = 0.0;  // inclusion radius in kernel units
  if (J.compact()) {
    reach = J.support_radius();
    dk.half_width = static_cast<int>(std::ceil(reach / s + 0.5)) - 1;
  } else {
    const double L = cutoff.value_or(5.0 * epsilon);
    if (L < 5.0 * epsilon * (1.0 - 1e-12)) throw std::invalid_argument("cutoff must be at least 5*epsilon");
    reach = L / epsilon;
    dk.half_width = static_cast<int>(std::floor(L / h + 1e-9));
    dk.mass_deficit = tail_mass(J, reach);
    target = 1.0 - dk.mass_deficit;
  }
  const int K = dk.half_width;
  const int side = dk.side();
  auto included = [&](int a, int b) {
    if (J.compact()) {
      const double da = std::max(0.0, std::abs(a) - 0.5);
      const double db = std::max(0.0, std::abs(b) - 0.5);
      return std::hypot(da, db) * s < reach;
    }
    return std::hypot(static_cast<double>(a), static_cast<double>(b)) * h <= reach * epsilon * (1.0 + 1e-12);
  };
  if (dk.dim == 1) {
    dk.weights.assign(side, 0.0);
    std::vector<double> half(K + 1, 0.0);
    const auto cuts = J.breakpoints();
#pragma omp parallel for schedule(dynamic, 16)
    for (int k = 0; k <= K; ++k) {
      if (!included(k, 0)) continue;
      auto f = [&J](double y) { return J(std::fabs(y)); };
      std::vector<double> c{0.0};
      for (double b : cuts) c.push_back(b), c.push_back(-b);
      half[k] = quad::integrate(f, (k - 0.5) * s, (k + 0.5) * s, c, 1e-12);
    }
    for (int k = 0; k <= K; ++k) {
      dk.weights[K + k] = half[k];
      dk.weights[K - k] = half[k];
    }
  } else {
    dk.weights.assign(static_cast<std::size_t>(side) * side, 0.0);
    std::vector<std::pair<int, int>> canon;
    for (int a = 0; a <= K; ++a) {
      for (int b = 0; b <= a; ++b) {
        if (included(a, b)) canon.emplace_back(a, b);
      }
    }
    std::vector<double> vals(canon.size(), 0.0);
#pragma omp parallel for schedule(dynamic, 4)
    for (std::size_t i = 0; i < canon.size(); ++i) {
      const auto [a, b] = canon[i];
      vals[i] = cell_integral_2d(J, (a - 0.5) * s, (a + 0.5) * s, (b - 0.5) * s, (b + 0.5) * s);
    }
    for (std::size_t i = 0; i < canon.size(); ++i) {
      const auto [a, b] = canon[i];
      for (int sa : {-1, 1}) {
        for (int sb : {-1, 1}) {
          dk.weights[static_cast<std::size_t>(sa * a + K) * side + (sb * b + K)] = vals[i];
          dk.weights[static_cast<std::size_t>(sb * b + K) * side + (sa * a + K)] = vals[i];
        }
      }
    }
  }
  const double raw = dk.total();
  if (!(raw > 0.0)) throw std::runtime_error("discrete kernel has no mass");
  const double scale = target / raw;
  for (double& w : dk.weights) w *= scale;
  return dk;
}

void write_kernel_csv(const DiscreteKernel& k, std::ostream& os) {
  const int K = k.half_width;
  if (k.dim == 1) {
    CsvWriter csv({"k", "weight"});
    for (int a = -K; a <= K; ++a) {
      if (k.at(a) != 0.0) csv.row({std::to_string(a), format_double(k.at(a))});
    }
    os << csv.str();
  } else {
    CsvWriter csv({"k1", "k2", "weight"});
    for (int a = -K; a <= K; ++a) {
      for (int b = -K; b <= K; ++b) {
        if (k.at(a, b) != 0.0) csv.row({std::to_string(a), std::to_string(b), format_double(k.at(a, b))});
      }
    }
    os << csv.str();
  }
}

double lattice_spacing(const KernelProfile& J, double epsilon, double spacing_factor, double max_h) {
  if (!(epsilon > 0.0) || !(spacing_factor > 0.0)) throw std::invalid_argument("bad lattice spacing request");
  double q = std::ceil(std::max(spacing_factor, 4.0 / J.core_radius()) - 1e-9);
  if (std::isfinite(max_h)) q = std::max(q, std::ceil(epsilon / max_h - 1e-9));
  return epsilon / q;
}

}  // namespace nlkpp
