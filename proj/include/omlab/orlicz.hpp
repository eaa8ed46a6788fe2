#pragma once

// Luxemburg averages ‖f‖_{Φ,Q} and the dyadic / shifted-dyadic maximal
// operators built from them.
//
// Every Luxemburg average is computed from the cube's value histogram
// (distinct positive values, ascending, with cell counts). The histogram of a
// cube does not depend on how it was assembled, so the OpenMP kernel (which
// merges children bottom-up) and the serial reference (which sorts the cells
// of each cube) produce bit-identical results.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "omlab/geometry.hpp"
#include "omlab/young.hpp"

namespace omlab {

using ValueHistogram = std::vector<std::pair<double, std::int64_t>>;

ValueHistogram histogram_of(const GridFunction& f, const DyadicCube& q);
/// Canonical merge: ascending values, equal values combined.
ValueHistogram merge_histograms(std::span<const ValueHistogram* const> parts);

/// The λ solving (cell_volume/cube_volume) Σ count Φ(value/λ) = 1; zero for an
/// empty histogram.
double luxemburg_from_histogram(const ValueHistogram& hist, double cube_volume,
                                double cell_volume, const YoungPhi& phi);

/// ‖f‖_{Φ,Q} with f = 0 outside the box.
double luxemburg_average(const GridFunction& f, const DyadicCube& q, const YoungPhi& phi);

struct GenRange {
  int lo;
  int hi;
};

GenRange default_gens(const Domain& d);

/// Luxemburg averages of every cube of one grid meeting the box, for each
/// generation in a range.
struct CubeTable {
  int grid = 0;
  GenRange gens{0, -1};
  std::vector<CubeLattice> lattices;         // one per generation, lo..hi
  std::vector<std::vector<double>> values;   // parallel to lattices

  const CubeLattice& lattice(int gen) const { return lattices.at(static_cast<std::size_t>(gen - gens.lo)); }
  const std::vector<double>& at(int gen) const { return values.at(static_cast<std::size_t>(gen - gens.lo)); }
  double value(const DyadicCube& q) const;
};

/// OpenMP kernel: bottom-up histogram merging, cubes of a generation in parallel.
CubeTable cube_averages(const GridFunction& f, const YoungPhi& phi, int grid, GenRange gens);
/// Serial reference: one luxemburg_average call per cube.
CubeTable cube_averages_reference(const GridFunction& f, const YoungPhi& phi, int grid,
                                  GenRange gens);

struct MaximalField {
  Domain domain;
  std::vector<double> values;  // per cell
  YoungPhi phi;
  std::vector<int> grids;
  GenRange gens;

  double operator[](Index i) const noexcept { return values[static_cast<std::size_t>(i)]; }
};

/// Per-cell maximum of a cube table.
MaximalField maximal_from_table(const GridFunction& f, const YoungPhi& phi, const CubeTable& table);

/// M_{Φ,D} f for one grid over generations `gens`.
MaximalField dyadic_maximal(const GridFunction& f, const YoungPhi& phi, int grid, GenRange gens);
MaximalField dyadic_maximal(const GridFunction& f, const YoungPhi& phi, int grid = 0);
MaximalField dyadic_maximal_reference(const GridFunction& f, const YoungPhi& phi, int grid,
                                      GenRange gens);

struct MaximalSandwich {
  MaximalField lower;  // max over the 3^n grids: pointwise below M_Φ f
  MaximalField upper;  // 3^n · lower: pointwise above M_Φ f
};

MaximalSandwich full_maximal(const GridFunction& f, const YoungPhi& phi);
MaximalSandwich full_maximal(const GridFunction& f, const YoungPhi& phi, GenRange gens);

}  // namespace omlab
