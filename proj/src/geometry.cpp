#include "omlab/geometry.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "omlab/summation.hpp"

namespace omlab {

namespace {

constexpr int kMaxCellBits = 26;

bool odd(int k) noexcept { return (k & 1) != 0; }

Index pow2(int e) { return Index{1} << e; }

}  // namespace

Domain::Domain(int dim, int box_exp, int cell_exp)
    : dim_(dim), box_exp_(box_exp), cell_exp_(cell_exp) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("unsupported dimension");
  if (cell_exp >= box_exp) throw std::invalid_argument("cell_exp must be below box_exp");
  if (dim * levels() > kMaxCellBits) throw std::invalid_argument("domain has too many cells");
  if (std::abs(cell_exp) > 400 || std::abs(box_exp) > 400) {
    throw std::invalid_argument("exponent out of floating-point range");
  }
}

Index Domain::flat_index(const Coords& cell) const noexcept {
  const Index n = cells_per_axis();
  Index acc = 0;
  for (int i = 0; i < dim_; ++i) acc = acc * n + cell[i];
  return acc;
}

Coords Domain::cell_coords(Index flat) const noexcept {
  const Index n = cells_per_axis();
  Coords c{};
  for (int i = dim_ - 1; i >= 0; --i) {
    c[i] = flat % n;
    flat /= n;
  }
  return c;
}

bool Domain::contains_cell(const Coords& cell) const noexcept {
  const Index n = cells_per_axis();
  for (int i = 0; i < dim_; ++i) {
    if (cell[i] < 0 || cell[i] >= n) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

int grid_count(int dim) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("unsupported dimension");
  int n = 1;
  for (int i = 0; i < dim; ++i) n *= 3;
  return n;
}

GridShift grid_shift(int dim, int id) {
  if (id < 0 || id >= grid_count(dim)) throw std::invalid_argument("grid id out of range");
  GridShift g;
  g.id = id;
  for (int i = 0; i < dim; ++i) {
    g.t[i] = id % 3;
    id /= 3;
  }
  return g;
}

std::vector<GridShift> shifted_grids(int dim) {
  std::vector<GridShift> out;
  const int n = grid_count(dim);
  out.reserve(static_cast<std::size_t>(n));
  for (int id = 0; id < n; ++id) out.push_back(grid_shift(dim, id));
  return out;
}

Index snapped_offset(int t, int gen, int cell_exp) {
  const int e = gen - cell_exp;
  if (e < 0) throw std::invalid_argument("cube finer than cells");
  if (e > 60) throw std::invalid_argument("generation too coarse for this cell size");
  if (t == 0) return 0;
  // Real offset in cells is s/3 with s = (-1)^gen t 2^e; the first cell whose
  // center is at or right of it has index ceil(s/3 - 1/2) = ceil((2s - 3)/6).
  const Index s = (odd(gen) ? -1 : 1) * static_cast<Index>(t) * pow2(e);
  return -floor_div(-(2 * s - 3), 6);
}

// ---------------------------------------------------------------------------

std::string to_string(const DyadicCube& q, int dim) {
  std::ostringstream os;
  os << q.grid << ':' << q.gen << ':';
  for (int i = 0; i < dim; ++i) os << (i ? "," : "") << q.coords[i];
  return os.str();
}

bool CellBox::empty(int dim) const noexcept {
  for (int i = 0; i < dim; ++i) {
    if (hi[i] <= lo[i]) return true;
  }
  return false;
}

Index CellBox::count(int dim) const noexcept {
  if (empty(dim)) return 0;
  Index n = 1;
  for (int i = 0; i < dim; ++i) n *= hi[i] - lo[i];
  return n;
}

CellBox cell_box(const DyadicCube& q, const Domain& d) {
  const GridShift g = grid_shift(d.dim(), q.grid);
  if (q.gen < d.min_gen()) throw std::invalid_argument("cube finer than cells");
  const Index side = pow2(q.gen - d.cell_exp());
  CellBox b;
  for (int i = 0; i < kMaxDim; ++i) {
    if (i < d.dim()) {
      b.lo[i] = side * q.coords[i] + snapped_offset(g.t[i], q.gen, d.cell_exp());
      b.hi[i] = b.lo[i] + side;
    } else {
      b.lo[i] = 0;
      b.hi[i] = 1;
    }
  }
  return b;
}

CellBox clipped_cell_box(const DyadicCube& q, const Domain& d) {
  CellBox b = cell_box(q, d);
  const Index n = d.cells_per_axis();
  for (int i = 0; i < d.dim(); ++i) {
    b.lo[i] = std::clamp<Index>(b.lo[i], 0, n);
    b.hi[i] = std::clamp<Index>(b.hi[i], 0, n);
  }
  return b;
}

bool inside_box(const DyadicCube& q, const Domain& d) {
  const CellBox b = cell_box(q, d);
  const Index n = d.cells_per_axis();
  for (int i = 0; i < d.dim(); ++i) {
    if (b.lo[i] < 0 || b.hi[i] > n) return false;
  }
  return true;
}

bool meets_box(const DyadicCube& q, const Domain& d) {
  return !clipped_cell_box(q, d).empty(d.dim());
}

std::vector<Index> cells_of(const DyadicCube& q, const Domain& d) {
  const CellBox b = clipped_cell_box(q, d);
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(b.count(d.dim())));
  for_each_cell(b, d, [&](Index i) { out.push_back(i); });
  return out;
}

DyadicCube cube_containing_cell(const Domain& d, int grid, int gen, const Coords& cell) {
  const GridShift g = grid_shift(d.dim(), grid);
  if (gen < d.min_gen()) throw std::invalid_argument("cube finer than cells");
  const Index side = pow2(gen - d.cell_exp());
  DyadicCube q{grid, gen, {}};
  for (int i = 0; i < d.dim(); ++i) {
    q.coords[i] = floor_div(cell[i] - snapped_offset(g.t[i], gen, d.cell_exp()), side);
  }
  return q;
}

DyadicCube ancestor(const Domain& d, const DyadicCube& q, int gen) {
  if (gen < q.gen) throw std::invalid_argument("ancestor generation below cube generation");
  return cube_containing_cell(d, q.grid, gen, cell_box(q, d).lo);
}

DyadicCube parent(const Domain& d, const DyadicCube& q) { return ancestor(d, q, q.gen + 1); }

std::vector<DyadicCube> children(const Domain& d, const DyadicCube& q) {
  if (q.gen - 1 < d.min_gen()) throw std::invalid_argument("cube has no children at cell resolution");
  const CellBox b = cell_box(q, d);
  const DyadicCube first = cube_containing_cell(d, q.grid, q.gen - 1, b.lo);
  std::vector<DyadicCube> out;
  const int n = d.dim();
  for (int mask = 0; mask < (1 << n); ++mask) {
    DyadicCube c = first;
    for (int i = 0; i < n; ++i) c.coords[i] += (mask >> (n - 1 - i)) & 1;
    out.push_back(c);
  }
  return out;
}

bool contains(const Domain& d, const DyadicCube& outer, const DyadicCube& inner) {
  if (outer.grid != inner.grid || outer.gen < inner.gen) return false;
  return ancestor(d, inner, outer.gen) == outer;
}

// ---------------------------------------------------------------------------

CubeLattice::CubeLattice(const Domain& d, int grid, int gen)
    : dim_(d.dim()), grid_(grid), gen_(gen), side_(0), size_(1) {
  if (gen < d.min_gen()) throw std::invalid_argument("cube finer than cells");
  const GridShift g = grid_shift(d.dim(), grid);
  side_ = pow2(gen - d.cell_exp());
  const Index n = d.cells_per_axis();
  for (int i = 0; i < kMaxDim; ++i) {
    if (i < dim_) {
      offset_[i] = snapped_offset(g.t[i], gen, d.cell_exp());
      first_[i] = floor_div(-offset_[i], side_);
      extent_[i] = floor_div(n - 1 - offset_[i], side_) - first_[i] + 1;
    } else {
      offset_[i] = 0;
      first_[i] = 0;
      extent_[i] = 1;
    }
    size_ *= extent_[i];
  }
}

DyadicCube CubeLattice::cube(Index i) const {
  DyadicCube q{grid_, gen_, {}};
  for (int a = kMaxDim - 1; a >= 0; --a) {
    q.coords[a] = first_[a] + i % extent_[a];
    i /= extent_[a];
  }
  for (int a = dim_; a < kMaxDim; ++a) q.coords[a] = 0;
  return q;
}

Index CubeLattice::index_of(const Coords& coords) const noexcept {
  Index acc = 0;
  for (int a = 0; a < kMaxDim; ++a) {
    const Index c = a < dim_ ? coords[a] - first_[a] : 0;
    if (c < 0 || c >= extent_[a]) return -1;
    acc = acc * extent_[a] + c;
  }
  return acc;
}

Index CubeLattice::index_of_cell(const Coords& cell) const noexcept {
  Coords c{};
  for (int a = 0; a < dim_; ++a) c[a] = floor_div(cell[a] - offset_[a], side_);
  return index_of(c);
}

// ---------------------------------------------------------------------------

RealCube real_cube(const DyadicCube& q, int dim) {
  const GridShift g = grid_shift(dim, q.grid);
  RealCube r;
  r.side = std::ldexp(1.0, q.gen);
  const double sign = odd(q.gen) ? -1.0 : 1.0;
  for (int i = 0; i < dim; ++i) {
    r.lower[i] = r.side * (static_cast<double>(q.coords[i]) + sign * g.t[i] / 3.0);
  }
  return r;
}

bool real_contains(const RealCube& outer, const RealCube& inner, int dim) {
  for (int i = 0; i < dim; ++i) {
    if (inner.lower[i] < outer.lower[i]) return false;
    if (inner.lower[i] + inner.side > outer.lower[i] + outer.side) return false;
  }
  return true;
}

Cover cover_cube(const RealCube& q, int dim) {
  if (!(q.side > 0.0) || !std::isfinite(q.side)) throw std::invalid_argument("cube side must be positive");
  int e = 0;
  const double mant = std::frexp(q.side, &e);
  const int kmin = mant == 0.5 ? e - 1 : e;
  for (int k = kmin; k <= kmin + 2; ++k) {
    const double side = std::ldexp(1.0, k);
    const double sign = odd(k) ? -1.0 : 1.0;
    for (const GridShift& g : shifted_grids(dim)) {
      DyadicCube c{g.id, k, {}};
      for (int i = 0; i < dim; ++i) {
        c.coords[i] = static_cast<Index>(std::floor(q.lower[i] / side - sign * g.t[i] / 3.0));
      }
      if (real_contains(real_cube(c, dim), q, dim)) return {c, side / q.side};
    }
  }
  throw std::logic_error("no shifted dyadic cube covers the given cube");
}

// ---------------------------------------------------------------------------

GridFunction::GridFunction(Domain domain, std::vector<double> values)
    : domain_(domain), values_(std::move(values)) {
  if (static_cast<Index>(values_.size()) != domain_.cell_count()) {
    throw std::invalid_argument("value count does not match the domain");
  }
  for (double x : values_) {
    if (!std::isfinite(x) || x < 0.0) {
      throw std::invalid_argument("grid function values must be finite and nonnegative");
    }
  }
}

GridFunction GridFunction::constant(const Domain& domain, double value) {
  return GridFunction(domain, std::vector<double>(static_cast<std::size_t>(domain.cell_count()), value));
}

double GridFunction::max_value() const noexcept {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

double GridFunction::min_value() const noexcept {
  return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

bool GridFunction::strictly_positive() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return x > 0.0; });
}

GridFunction GridFunction::refined() const {
  const Domain fine = domain_.refined();
  std::vector<double> out(static_cast<std::size_t>(fine.cell_count()));
  for (Index i = 0; i < fine.cell_count(); ++i) {
    Coords c = fine.cell_coords(i);
    for (int a = 0; a < domain_.dim(); ++a) c[a] /= 2;
    out[static_cast<std::size_t>(i)] = values_[static_cast<std::size_t>(domain_.flat_index(c))];
  }
  return GridFunction(fine, std::move(out));
}

void require_same_domain(const GridFunction& f, const GridFunction& g) {
  if (!(f.domain() == g.domain())) throw std::invalid_argument("grid functions live on different domains");
}

double integrate(const GridFunction& f, const DyadicCube& q) {
  const Domain& d = f.domain();
  CompensatedSum s;
  for_each_cell(clipped_cell_box(q, d), d, [&](Index i) { s.add(f[i]); });
  return s.value() * d.cell_volume();
}

double integrate(const GridFunction& f) {
  return compensated_sum(f.values()) * f.domain().cell_volume();
}

double average(const GridFunction& f, const DyadicCube& q) {
  return integrate(f, q) / cube_volume(q, f.domain().dim());
}

double min_over(const GridFunction& f, const DyadicCube& q) {
  double m = std::numeric_limits<double>::infinity();
  for_each_cell(clipped_cell_box(q, f.domain()), f.domain(), [&](Index i) { m = std::min(m, f[i]); });
  return m;
}

double integrate_masked(const GridFunction& f, std::span<const std::uint8_t> mask) {
  if (static_cast<Index>(mask.size()) != f.size()) throw std::invalid_argument("mask size mismatch");
  CompensatedSum s;
  for (Index i = 0; i < f.size(); ++i) {
    if (mask[static_cast<std::size_t>(i)]) s.add(f[i]);
  }
  return s.value() * f.domain().cell_volume();
}

}  // namespace omlab
