#include "omlab/orlicz.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "omlab/summation.hpp"

namespace omlab {

namespace {

constexpr double kLuxemburgTol = 1e-12;
constexpr int kMaxBisection = 200;
constexpr int kMaxExpansion = 2000;

void compress(ValueHistogram& h) {
  std::size_t out = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (out > 0 && h[out - 1].first == h[i].first) {
      h[out - 1].second += h[i].second;
    } else {
      h[out++] = h[i];
    }
  }
  h.resize(out);
}

double modular(const ValueHistogram& hist, double scale, const YoungPhi& phi, double lambda) {
  CompensatedSum s;
  for (const auto& [value, count] : hist) s.add(static_cast<double>(count) * phi(value / lambda));
  return scale * s.value();
}

void check_gens(const Domain& d, GenRange gens) {
  if (gens.hi < gens.lo) throw std::invalid_argument("empty generation range");
  if (gens.lo < d.min_gen()) throw std::invalid_argument("generation range below cell resolution");
  if (gens.hi - d.cell_exp() > 60) throw std::invalid_argument("generation range too coarse");
}

}  // namespace

ValueHistogram histogram_of(const GridFunction& f, const DyadicCube& q) {
  ValueHistogram h;
  for_each_cell(clipped_cell_box(q, f.domain()), f.domain(), [&](Index i) {
    if (f[i] > 0.0) h.emplace_back(f[i], 1);
  });
  std::sort(h.begin(), h.end());
  compress(h);
  return h;
}

ValueHistogram merge_histograms(std::span<const ValueHistogram* const> parts) {
  ValueHistogram acc;
  ValueHistogram tmp;
  for (const ValueHistogram* p : parts) {
    tmp.clear();
    tmp.reserve(acc.size() + p->size());
    std::merge(acc.begin(), acc.end(), p->begin(), p->end(), std::back_inserter(tmp),
               [](const auto& a, const auto& b) { return a.first < b.first; });
    std::swap(acc, tmp);
  }
  compress(acc);
  return acc;
}

double luxemburg_from_histogram(const ValueHistogram& hist, double cube_volume, double cell_volume,
                                const YoungPhi& phi) {
  if (hist.empty()) return 0.0;
  const double scale = cell_volume / cube_volume;

  CompensatedSum moment;
  for (const auto& [value, count] : hist) moment.add(static_cast<double>(count) * phi.power(value));
  const double mean = moment.value() * scale;
  const double power_mean = phi.r() == 1.0 ? mean : std::pow(mean, 1.0 / phi.r());
  if (phi.is_power()) return power_mean;

  // power_mean <= λ <= power_mean (1 + log⁺(max/power_mean))^(δ/r).
  const double top = hist.back().first;
  double lo = power_mean;
  double hi = power_mean * std::pow(1.0 + std::log(std::max(1.0, top / power_mean)),
                                    phi.delta() / phi.r());
  if (hi == lo) return lo;
  for (int i = 0; i < kMaxExpansion && modular(hist, scale, phi, hi) > 1.0; ++i) hi *= 2.0;
  for (int i = 0; i < kMaxExpansion && modular(hist, scale, phi, lo) < 1.0; ++i) lo *= 0.5;
  for (int it = 0; it < kMaxBisection && hi - lo > kLuxemburgTol * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (modular(hist, scale, phi, mid) > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

double luxemburg_average(const GridFunction& f, const DyadicCube& q, const YoungPhi& phi) {
  const Domain& d = f.domain();
  return luxemburg_from_histogram(histogram_of(f, q), cube_volume(q, d.dim()), d.cell_volume(), phi);
}

GenRange default_gens(const Domain& d) { return {d.min_gen(), d.default_max_gen()}; }

double CubeTable::value(const DyadicCube& q) const {
  if (q.grid != grid || q.gen < gens.lo || q.gen > gens.hi) throw std::out_of_range("cube outside table");
  const Index i = lattice(q.gen).index_of(q.coords);
  if (i < 0) throw std::out_of_range("cube does not meet the box");
  return at(q.gen)[static_cast<std::size_t>(i)];
}

CubeTable cube_averages(const GridFunction& f, const YoungPhi& phi, int grid, GenRange gens) {
  const Domain& d = f.domain();
  check_gens(d, gens);
  const double cell_volume = d.cell_volume();

  CubeTable table;
  table.grid = grid;
  table.gens = gens;

  std::vector<ValueHistogram> prev;
  std::vector<ValueHistogram> cur;
  CubeLattice prev_lattice(d, grid, d.min_gen());
  for (int gen = d.min_gen(); gen <= gens.hi; ++gen) {
    const CubeLattice lat(d, grid, gen);
    const Index n = lat.size();
    cur.assign(static_cast<std::size_t>(n), {});
    std::vector<double> values;
    const bool keep = gen >= gens.lo;
    if (keep) values.assign(static_cast<std::size_t>(n), 0.0);
    const double volume = std::ldexp(1.0, d.dim() * gen);

#pragma omp parallel for schedule(dynamic, 64)
    for (Index i = 0; i < n; ++i) {
      const DyadicCube q = lat.cube(i);
      ValueHistogram& h = cur[static_cast<std::size_t>(i)];
      if (gen == d.min_gen()) {
        const Coords cell = cell_box(q, d).lo;
        const double x = f[d.flat_index(cell)];
        if (x > 0.0) h.emplace_back(x, 1);
      } else {
        const ValueHistogram* parts[1 << kMaxDim];
        std::size_t used = 0;
        for (const DyadicCube& c : children(d, q)) {
          const Index j = prev_lattice.index_of(c.coords);
          if (j >= 0) parts[used++] = &prev[static_cast<std::size_t>(j)];
        }
        h = merge_histograms(std::span<const ValueHistogram* const>(parts, used));
      }
      if (keep) values[static_cast<std::size_t>(i)] = luxemburg_from_histogram(h, volume, cell_volume, phi);
    }

    if (keep) {
      table.lattices.push_back(lat);
      table.values.push_back(std::move(values));
    }
    std::swap(prev, cur);
    prev_lattice = lat;
  }
  return table;
}

CubeTable cube_averages_reference(const GridFunction& f, const YoungPhi& phi, int grid,
                                  GenRange gens) {
  const Domain& d = f.domain();
  check_gens(d, gens);
  CubeTable table;
  table.grid = grid;
  table.gens = gens;
  for (int gen = gens.lo; gen <= gens.hi; ++gen) {
    const CubeLattice lat(d, grid, gen);
    std::vector<double> values(static_cast<std::size_t>(lat.size()));
    for (Index i = 0; i < lat.size(); ++i) {
      values[static_cast<std::size_t>(i)] = luxemburg_average(f, lat.cube(i), phi);
    }
    table.lattices.push_back(lat);
    table.values.push_back(std::move(values));
  }
  return table;
}

MaximalField maximal_from_table(const GridFunction& f, const YoungPhi& phi, const CubeTable& table) {
  const Domain& d = f.domain();
  MaximalField out{d, std::vector<double>(static_cast<std::size_t>(d.cell_count()), 0.0), phi,
                   {table.grid}, table.gens};
  const Index n = d.cell_count();
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    const Coords cell = d.cell_coords(i);
    double m = 0.0;
    for (std::size_t g = 0; g < table.lattices.size(); ++g) {
      const Index j = table.lattices[g].index_of_cell(cell);
      m = std::max(m, table.values[g][static_cast<std::size_t>(j)]);
    }
    out.values[static_cast<std::size_t>(i)] = m;
  }
  return out;
}

MaximalField dyadic_maximal(const GridFunction& f, const YoungPhi& phi, int grid, GenRange gens) {
  return maximal_from_table(f, phi, cube_averages(f, phi, grid, gens));
}

MaximalField dyadic_maximal(const GridFunction& f, const YoungPhi& phi, int grid) {
  return dyadic_maximal(f, phi, grid, default_gens(f.domain()));
}

MaximalField dyadic_maximal_reference(const GridFunction& f, const YoungPhi& phi, int grid,
                                      GenRange gens) {
  const CubeTable table = cube_averages_reference(f, phi, grid, gens);
  const Domain& d = f.domain();
  MaximalField out{d, std::vector<double>(static_cast<std::size_t>(d.cell_count()), 0.0), phi,
                   {grid}, gens};
  for (Index i = 0; i < d.cell_count(); ++i) {
    const Coords cell = d.cell_coords(i);
    double m = 0.0;
    for (int gen = gens.lo; gen <= gens.hi; ++gen) {
      m = std::max(m, table.value(cube_containing_cell(d, grid, gen, cell)));
    }
    out.values[static_cast<std::size_t>(i)] = m;
  }
  return out;
}

MaximalSandwich full_maximal(const GridFunction& f, const YoungPhi& phi, GenRange gens) {
  const Domain& d = f.domain();
  const int grids = grid_count(d.dim());
  MaximalField lower = dyadic_maximal(f, phi, 0, gens);
  for (int g = 1; g < grids; ++g) {
    const MaximalField m = dyadic_maximal(f, phi, g, gens);
    for (std::size_t i = 0; i < lower.values.size(); ++i) {
      lower.values[i] = std::max(lower.values[i], m.values[i]);
    }
    lower.grids.push_back(g);
  }
  MaximalField upper = lower;
  for (double& x : upper.values) x *= static_cast<double>(grids);
  return {std::move(lower), std::move(upper)};
}

MaximalSandwich full_maximal(const GridFunction& f, const YoungPhi& phi) {
  return full_maximal(f, phi, default_gens(f.domain()));
}

}  // namespace omlab
