#include "nlkpp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "nlkpp/io.hpp"
#include "nlkpp/parallel.hpp"

namespace nlkpp {

namespace {

// largest j >= 0 with 4*(i^2 + j^2) <= t^2, or -1
int column_half(long t, long i) {
  const long rem = t * t - 4 * i * i;
  if (rem < 0) return -1;
  long j = static_cast<long>(std::floor(std::sqrt(static_cast<double>(rem) / 4.0)));
  while (4 * (j + 1) * (j + 1) <= rem) ++j;
  while (j > 0 && 4 * j * j > rem) --j;
  return static_cast<int>(j);
}

}  // namespace

GridPtr Grid::make(int dim, double R, double h, std::size_t node_cap) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("grid dimension must be 1 or 2");
  if (!(R > 0.0) || !(h > 0.0) || !std::isfinite(R) || !std::isfinite(h)) {
    throw std::invalid_argument("grid radius and spacing must be positive");
  }
  const double cells = 2.0 * R / h;
  const double rounded = std::round(cells);
  if (std::fabs(cells - rounded) > 1e-9 * std::max(1.0, cells) || rounded < 1.0) {
    throw std::invalid_argument("2R/h = " + format_double(cells) + " is not an integer");
  }
  const double estimate = dim == 1 ? rounded + 1.0 : std::numbers::pi * 0.25 * (rounded + 2.0) * (rounded + 2.0);
  if (estimate > static_cast<double>(node_cap) * 1.1 + 16.0) {
    throw std::invalid_argument("grid with about " + format_double(std::round(estimate)) +
                                " nodes exceeds the node cap " + std::to_string(node_cap));
  }
  std::shared_ptr<Grid> g(new Grid());
  g->dim_ = dim;
  g->R_ = R;
  g->h_ = h;
  g->twoRh_ = static_cast<long>(rounded);
  g->M_ = static_cast<int>(g->twoRh_ / 2);
  const int M = g->M_;
  if (dim == 1) {
    g->size_ = static_cast<std::size_t>(2 * M + 1);
  } else {
    g->row_half_.resize(static_cast<std::size_t>(2 * M + 1));
    g->row_start_.resize(static_cast<std::size_t>(2 * M + 1));
    std::size_t count = 0;
    for (int i = -M; i <= M; ++i) {
      const int J = column_half(g->twoRh_, i);
      g->row_half_[static_cast<std::size_t>(i + M)] = J;
      g->row_start_[static_cast<std::size_t>(i + M)] = count;
      count += static_cast<std::size_t>(2 * J + 1);
    }
    g->size_ = count;
  }
  if (g->size_ > node_cap) {
    throw std::invalid_argument("grid with " + std::to_string(g->size_) + " nodes exceeds the node cap " +
                                std::to_string(node_cap));
  }
  return g;
}

std::array<int, 2> Grid::index(std::size_t n) const {
  if (dim_ == 1) return {static_cast<int>(n) - M_, 0};
  auto it = std::upper_bound(row_start_.begin(), row_start_.end(), n);
  const int r = static_cast<int>(it - row_start_.begin()) - 1;
  const int i = r - M_;
  const int j = static_cast<int>(n - row_start_[static_cast<std::size_t>(r)]) - row_half_[static_cast<std::size_t>(r)];
  return {i, j};
}

std::array<double, 2> Grid::point(std::size_t n) const {
  const auto [i, j] = index(n);
  return {i * h_, j * h_};
}

double Grid::norm(std::size_t n) const {
  const auto p = point(n);
  return std::hypot(p[0], p[1]);
}

bool Grid::contains(int i, int j) const {
  if (dim_ == 1) return j == 0 && 2L * std::abs(i) <= twoRh_;
  const long a = i;
  const long b = j;
  return 4 * (a * a + b * b) <= twoRh_ * twoRh_;
}

long Grid::find(int i, int j) const {
  if (!contains(i, j)) return -1;
  if (dim_ == 1) return i + M_;
  const auto r = static_cast<std::size_t>(i + M_);
  return static_cast<long>(row_start_[r]) + j + row_half_[r];
}

Field::Field(GridPtr grid, double fill) : grid_(std::move(grid)), values_(grid_->size(), fill) {}

Field::Field(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->size()) throw std::invalid_argument("field size does not match grid");
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void Field::require_finite(const char* what) const {
  if (!all_finite()) throw std::domain_error(std::string(what) + " has non-finite values");
}

double integrate(const Field& f) { return pairwise_sum(f.values()) * f.grid()->cell_volume(); }

double sup_norm(const Field& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::fabs(v));
  return m;
}

double inf_on(const Field& f, std::span<const std::size_t> nodes) {
  double m = std::numeric_limits<double>::infinity();
  for (auto n : nodes) m = std::min(m, f[n]);
  return m;
}

double max_on(const Field& f, std::span<const std::size_t> nodes) {
  double m = -std::numeric_limits<double>::infinity();
  for (auto n : nodes) m = std::max(m, f[n]);
  return m;
}

double round_up_to_spacing(double R, double h) { return std::ceil(R / h - 1e-9) * h; }

void require_same_grid(const Field& a, const Field& b, const char* what) {
  if (a.grid() != b.grid()) {
    const auto& ga = *a.grid();
    const auto& gb = *b.grid();
    if (ga.dim() != gb.dim() || ga.size() != gb.size() || ga.spacing() != gb.spacing() ||
        ga.radius() != gb.radius()) {
      throw std::invalid_argument(std::string(what) + ": fields live on different grids");
    }
  }
}

Field restrict_to(const Field& f, const GridPtr& target) {
  const Grid& src = *f.grid();
  if (target->dim() != src.dim()) throw std::invalid_argument("restrict: dimension mismatch");
  const double ratio = target->spacing() / src.spacing();
  const long q = std::lround(ratio);
  if (q < 1 || std::fabs(ratio - q) > 1e-9 * ratio) {
    throw std::invalid_argument("restrict: target spacing is not a multiple of the source spacing");
  }
  Field out(target);
  for (std::size_t n = 0; n < target->size(); ++n) {
    const auto [i, j] = target->index(n);
    const long m = src.find(static_cast<int>(i * q), static_cast<int>(j * q));
    if (m < 0) throw std::invalid_argument("restrict: grids are not nested");
    out[n] = f[static_cast<std::size_t>(m)];
  }
  return out;
}

Field extend_by_zero(const Field& f, const GridPtr& target) {
  const Grid& src = *f.grid();
  if (target->dim() != src.dim() || std::fabs(target->spacing() - src.spacing()) > 1e-12 * src.spacing()) {
    throw std::invalid_argument("extend: grids must share dimension and spacing");
  }
  Field out(target, 0.0);
  for (std::size_t n = 0; n < src.size(); ++n) {
    const auto [i, j] = src.index(n);
    const long m = target->find(i, j);
    if (m < 0) throw std::invalid_argument("extend: target grid does not contain the source grid");
    out[static_cast<std::size_t>(m)] = f[n];
  }
  return out;
}

void write_field_csv(const Field& f, std::ostream& os) {
  const Grid& g = *f.grid();
  std::vector<std::string> header = g.dim() == 1 ? std::vector<std::string>{"x", "value"}
                                                 : std::vector<std::string>{"x", "y", "value"};
  CsvWriter csv(header);
  for (std::size_t n = 0; n < g.size(); ++n) {
    const auto p = g.point(n);
    if (g.dim() == 1) {
      csv.row(std::vector<double>{p[0], f[n]});
    } else {
      csv.row(std::vector<double>{p[0], p[1], f[n]});
    }
  }
  os << csv.str();
}

}  // namespace nlkpp
