#pragma once

// Dyadic cubes, the 3^n shifted dyadic grids, the bounded computation box
// and exact integration of piecewise-constant grid functions.
//
// The box is [0, 2^K)^n, split into cells of side 2^-m. A cube of grid t and
// generation k has lower corner 2^k (coords + (-1)^k t/3) in real space. At
// cell resolution a cube is realized as the union of the cells whose centers
// lie in it; this keeps every generation a partition of the cells, keeps
// parent/child nesting, and gives each realized cube exactly 2^(k+m) cells
// per side.

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace omlab {

inline constexpr int kMaxDim = 3;
using Index = std::int64_t;
using Coords = std::array<Index, kMaxDim>;

/// Floor division for possibly negative numerators.
constexpr Index floor_div(Index a, Index b) noexcept {
  const Index q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

class Domain {
 public:
  /// `cell_exp` is the (negative or zero) exponent -m of the cell side.
  Domain(int dim, int box_exp, int cell_exp);

  int dim() const noexcept { return dim_; }
  int box_exp() const noexcept { return box_exp_; }
  int cell_exp() const noexcept { return cell_exp_; }
  /// K + m, the number of halvings from the box to a cell.
  int levels() const noexcept { return box_exp_ - cell_exp_; }

  Index cells_per_axis() const noexcept { return Index{1} << levels(); }
  Index cell_count() const noexcept { return Index{1} << (dim_ * levels()); }
  double cell_side() const noexcept { return std::ldexp(1.0, cell_exp_); }
  double cell_volume() const noexcept { return std::ldexp(1.0, dim_ * cell_exp_); }
  double box_volume() const noexcept { return std::ldexp(1.0, dim_ * box_exp_); }

  int min_gen() const noexcept { return cell_exp_; }
  int default_max_gen() const noexcept { return box_exp_ + 2; }

  Index flat_index(const Coords& cell) const noexcept;
  Coords cell_coords(Index flat) const noexcept;
  bool contains_cell(const Coords& cell) const noexcept;

  /// Same box, cells halved.
  Domain refined() const { return Domain(dim_, box_exp_, cell_exp_ - 1); }

  friend bool operator==(const Domain&, const Domain&) = default;

 private:
  int dim_;
  int box_exp_;
  int cell_exp_;
};

// ---------------------------------------------------------------------------
// Shifted grids

struct GridShift {
  int id = 0;
  std::array<int, kMaxDim> t{};  // each entry in {0, 1, 2}
};

int grid_count(int dim);
GridShift grid_shift(int dim, int id);
std::vector<GridShift> shifted_grids(int dim);

/// Offset, in cells, of the generation-`gen` lattice of a grid with shift
/// digit `t`, for cells of side 2^cell_exp.
Index snapped_offset(int t, int gen, int cell_exp);

// ---------------------------------------------------------------------------
// Cubes

struct DyadicCube {
  int grid = 0;
  int gen = 0;
  Coords coords{};

  friend bool operator==(const DyadicCube&, const DyadicCube&) = default;
  friend auto operator<=>(const DyadicCube&, const DyadicCube&) = default;
};

std::string to_string(const DyadicCube& q, int dim);

inline double cube_side(const DyadicCube& q) noexcept { return std::ldexp(1.0, q.gen); }
inline double cube_volume(const DyadicCube& q, int dim) noexcept {
  return std::ldexp(1.0, dim * q.gen);
}

/// Half-open box of cell coordinates; axes >= dim are [0, 1).
struct CellBox {
  Coords lo{};
  Coords hi{};

  bool empty(int dim) const noexcept;
  Index count(int dim) const noexcept;
};

/// Cells of the cube's realization, not clipped to the box.
CellBox cell_box(const DyadicCube& q, const Domain& d);
/// Same, clipped to the box.
CellBox clipped_cell_box(const DyadicCube& q, const Domain& d);
bool inside_box(const DyadicCube& q, const Domain& d);
bool meets_box(const DyadicCube& q, const Domain& d);

/// Flat indices of the box cells belonging to `q`, row-major.
std::vector<Index> cells_of(const DyadicCube& q, const Domain& d);

template <class Fn>
void for_each_cell(const CellBox& box, const Domain& d, Fn&& fn) {
  Coords c{};
  for (c[0] = box.lo[0]; c[0] < box.hi[0]; ++c[0])
    for (c[1] = box.lo[1]; c[1] < box.hi[1]; ++c[1])
      for (c[2] = box.lo[2]; c[2] < box.hi[2]; ++c[2]) fn(d.flat_index(c));
}

DyadicCube cube_containing_cell(const Domain& d, int grid, int gen, const Coords& cell);
DyadicCube ancestor(const Domain& d, const DyadicCube& q, int gen);
DyadicCube parent(const Domain& d, const DyadicCube& q);
std::vector<DyadicCube> children(const Domain& d, const DyadicCube& q);
/// Set inclusion `inner ⊆ outer`; cubes of different grids are never compared.
bool contains(const Domain& d, const DyadicCube& outer, const DyadicCube& inner);

/// All cubes of one grid and generation that meet the box, indexed row-major.
class CubeLattice {
 public:
  CubeLattice(const Domain& d, int grid, int gen);

  int grid() const noexcept { return grid_; }
  int gen() const noexcept { return gen_; }
  Index side_cells() const noexcept { return side_; }
  Index size() const noexcept { return size_; }
  const Coords& first() const noexcept { return first_; }
  const Coords& extent() const noexcept { return extent_; }
  const Coords& offset() const noexcept { return offset_; }

  DyadicCube cube(Index i) const;
  /// -1 when the coordinates fall outside the lattice.
  Index index_of(const Coords& coords) const noexcept;
  Index index_of_cell(const Coords& cell) const noexcept;

 private:
  int dim_;
  int grid_;
  int gen_;
  Index side_;
  Coords offset_{};
  Coords first_{};
  Coords extent_{};
  Index size_;
};

// ---------------------------------------------------------------------------
// Real-space cubes and the covering theorem

struct RealCube {
  std::array<double, kMaxDim> lower{};
  double side = 1.0;
};

/// Exact (unsnapped) geometry of a shifted dyadic cube.
RealCube real_cube(const DyadicCube& q, int dim);
bool real_contains(const RealCube& outer, const RealCube& inner, int dim);

struct Cover {
  DyadicCube cube;
  double ratio;  // side(cube) / side(Q)
};

/// Smallest shifted dyadic cube containing `q`; its side is at most 3 side(q).
Cover cover_cube(const RealCube& q, int dim);

// ---------------------------------------------------------------------------
// Grid functions

/// Nonnegative piecewise-constant function on the cells of a domain, zero
/// outside the box.
class GridFunction {
 public:
  GridFunction(Domain domain, std::vector<double> values);
  static GridFunction constant(const Domain& domain, double value);

  const Domain& domain() const noexcept { return domain_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](Index i) const noexcept { return values_[static_cast<std::size_t>(i)]; }
  Index size() const noexcept { return static_cast<Index>(values_.size()); }

  double max_value() const noexcept;
  double min_value() const noexcept;
  bool strictly_positive() const noexcept;

  /// The same function on cells of half the side.
  GridFunction refined() const;

 private:
  Domain domain_;
  std::vector<double> values_;
};

template <class Op>
GridFunction transform(const GridFunction& f, Op op) {
  std::vector<double> out(f.values().begin(), f.values().end());
  for (double& x : out) x = op(x);
  return GridFunction(f.domain(), std::move(out));
}

void require_same_domain(const GridFunction& f, const GridFunction& g);

/// Cellwise combination `op(f[i], g[i])` on a shared domain.
template <class Op>
GridFunction combine(const GridFunction& f, const GridFunction& g, Op op) {
  require_same_domain(f, g);
  std::vector<double> out(static_cast<std::size_t>(f.size()));
  for (Index i = 0; i < f.size(); ++i) out[static_cast<std::size_t>(i)] = op(f[i], g[i]);
  return GridFunction(f.domain(), std::move(out));
}

/// ∫_Q f: compensated row-major sum over the box cells of `q`.
double integrate(const GridFunction& f, const DyadicCube& q);
/// ∫ f over the whole box.
double integrate(const GridFunction& f);
/// (1/|Q|) ∫_Q f with f = 0 outside the box.
double average(const GridFunction& f, const DyadicCube& q);
/// Minimum over the box cells of `q`; +inf when there are none.
double min_over(const GridFunction& f, const DyadicCube& q);
/// ∫ f over the cells where `mask` is nonzero.
double integrate_masked(const GridFunction& f, std::span<const std::uint8_t> mask);

}  // namespace omlab
