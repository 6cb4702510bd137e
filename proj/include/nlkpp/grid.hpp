#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace nlkpp {

/// Lattice h*Z^N intersected with the closed ball of radius R, N in {1, 2}.
/// Nodes are ordered lexicographically (x first, then y). In 2D each x-column
/// index i holds a contiguous run of nodes with |j| <= row_half(i).
class Grid {
 public:
  static constexpr std::size_t default_node_cap = 50'000'000;

  static std::shared_ptr<const Grid> make(int dim, double R, double h,
                                          std::size_t node_cap = default_node_cap);

  int dim() const { return dim_; }
  double radius() const { return R_; }
  double spacing() const { return h_; }
  double cell_volume() const { return dim_ == 1 ? h_ : h_ * h_; }
  std::size_t size() const { return size_; }

  /// Largest |i| along an axis (= floor(R/h)).
  int half_extent() const { return M_; }

  /// 1D: row 0 only. 2D: rows i in [-M, M].
  int row_half(int i) const { return dim_ == 1 ? M_ : row_half_[static_cast<std::size_t>(i + M_)]; }
  std::size_t row_start(int i) const { return dim_ == 1 ? 0 : row_start_[static_cast<std::size_t>(i + M_)]; }

  /// Integer lattice coordinates of node n.
  std::array<int, 2> index(std::size_t n) const;
  std::array<double, 2> point(std::size_t n) const;
  double norm(std::size_t n) const;

  /// Node number for lattice coordinates, or -1 when outside the ball.
  long find(int i, int j = 0) const;

  /// Exact integer membership test for the closed ball.
  bool contains(int i, int j = 0) const;

 private:
  Grid() = default;
  int dim_ = 1;
  double R_ = 0.0;
  double h_ = 1.0;
  long twoRh_ = 0;  // 2R/h
  int M_ = 0;
  std::size_t size_ = 0;
  std::vector<int> row_half_;
  std::vector<std::size_t> row_start_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Node values on a grid.
class Field {
 public:
  Field() = default;
  Field(GridPtr grid, double fill = 0.0);
  Field(GridPtr grid, std::vector<double> values);

  const GridPtr& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  bool all_finite() const;
  /// Throws std::domain_error naming `what` when any value is NaN or Inf.
  void require_finite(const char* what) const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// Builds a field from a function of the node coordinates.
template <class F>
Field sample_field(const GridPtr& g, F&& f) {
  Field out(g);
  for (std::size_t n = 0; n < g->size(); ++n) out[n] = f(g->point(n));
  return out;
}

/// Midpoint rule: sum of values times h^N, pairwise-summed.
double integrate(const Field& f);
double sup_norm(const Field& f);
/// Minimum over the listed nodes (+inf when the list is empty).
double inf_on(const Field& f, std::span<const std::size_t> nodes);
double max_on(const Field& f, std::span<const std::size_t> nodes);

/// Values of `f` at the nodes of a grid contained in f's grid. The spacing of
/// `target` must be an integer multiple of the source spacing.
Field restrict_to(const Field& f, const GridPtr& target);

/// Copies f onto a grid containing it, zero elsewhere (same spacing).
Field extend_by_zero(const Field& f, const GridPtr& target);

/// Smallest multiple of h that is >= R (up to rounding noise).
double round_up_to_spacing(double R, double h);

void require_same_grid(const Field& a, const Field& b, const char* what);

/// Columns x[,y],value with a header row.
void write_field_csv(const Field& f, std::ostream& os);

}  // namespace nlkpp
