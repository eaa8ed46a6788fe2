#include <doctest.h>

#include <cstring>
#include <stdexcept>

#include "omlab/orlicz.hpp"
#include "omlab/random.hpp"
#include "oracles.hpp"

using namespace omlab;

namespace {

GridFunction random_function(const Domain& d, Rng& rng, double zero_prob = 0.3) {
  std::vector<double> v(static_cast<std::size_t>(d.cell_count()));
  for (double& x : v) x = rng.coin(zero_prob) ? 0.0 : std::floor(rng.uniform(0, 8)) + rng.uniform(0, 1);
  return GridFunction(d, std::move(v));
}

}  // namespace

TEST_CASE("luxemburg closed forms") {
  const Domain d(1, 0, -2);
  const GridFunction f(d, {0, 0, 0, 8});
  CHECK(luxemburg_average(f, DyadicCube{0, 0, {0}}, YoungPhi(2, 0)) == doctest::Approx(4.0).epsilon(1e-13));

  // Indicator of a cube, seen in the cube itself and in its parent.
  const GridFunction chi(d, {1, 1, 0, 0});
  for (const YoungPhi& phi : {YoungPhi(1, 0), YoungPhi(1, 1), YoungPhi(3, 2)}) {
    CHECK(luxemburg_average(chi, DyadicCube{0, -1, {0}}, phi) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(luxemburg_average(chi, DyadicCube{0, 0, {0}}, YoungPhi(1, 1)) ==
        doctest::Approx(0.687411264091812).epsilon(1e-11));
  CHECK(luxemburg_average(chi, DyadicCube{0, 0, {0}}, YoungPhi(1, 1)) ==
        doctest::Approx(1.0 / phi_inverse(YoungPhi(1, 1), 2.0)).epsilon(1e-11));
  CHECK(luxemburg_average(GridFunction::constant(d, 0.0), DyadicCube{0, 0, {0}}, YoungPhi(1, 1)) == 0.0);
}

TEST_CASE("luxemburg against a long-double bisection") {
  Rng rng(21);
  const Domain d(1, 0, -5);
  for (int i = 0; i < 40; ++i) {
    const GridFunction f = random_function(d, rng);
    const YoungPhi phi(1 + static_cast<double>(i % 3), static_cast<double>(i % 4) * 0.5);
    const int gen = static_cast<int>(rng.integer(-5, 1));
    const DyadicCube q{0, gen, {0}};
    std::vector<double> cells;
    for (Index c : cells_of(q, d)) cells.push_back(f[c]);
    const double want = oracle::luxemburg(cells, d.cell_volume(), cube_volume(q, 1), phi.r(), phi.delta());
    CHECK(luxemburg_average(f, q, phi) == doctest::Approx(want).epsilon(1e-11));
  }
}

TEST_CASE("dyadic maximal, small example") {
  const Domain d(1, 0, -2);
  const GridFunction f(d, {0, 0, 0, 8});
  const MaximalField m = dyadic_maximal(f, YoungPhi(1, 0), 0);
  CHECK(m.values == std::vector<double>{2, 2, 4, 8});
  const MaximalField c = dyadic_maximal(GridFunction::constant(d, 3.0), YoungPhi(2, 1), 0);
  for (double x : c.values) CHECK(x == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("dyadic maximal matches interval enumeration") {
  Rng rng(5);
  for (int levels = 1; levels <= 6; ++levels) {
    const Domain d(1, 1, 1 - levels);
    for (const YoungPhi& phi : {YoungPhi(1, 0), YoungPhi(2, 1)}) {
      const GridFunction f = random_function(d, rng);
      const std::vector<double> want = oracle::dyadic_maximal_1d(
          std::vector<double>(f.values().begin(), f.values().end()), d.box_exp(), d.cell_exp(), phi);
      CHECK(dyadic_maximal(f, phi, 0).values == want);
    }
  }
}

TEST_CASE("Orlicz maximal dominates the plain one") {
  Rng rng(8);
  const Domain d(2, 0, -4);
  const GridFunction f = random_function(d, rng);
  const MaximalField plain = dyadic_maximal(f, YoungPhi(1, 0), 0);
  const MaximalField orl = dyadic_maximal(f, YoungPhi(1, 1), 0);
  for (Index i = 0; i < f.size(); ++i) CHECK(orl[i] >= plain[i]);
}

TEST_CASE("parallel kernel equals serial reference bit for bit") {
  Rng rng(13);
  for (int dim = 1; dim <= 3; ++dim) {
    const Domain d(dim, 0, dim == 1 ? -8 : (dim == 2 ? -4 : -2));
    const GridFunction f = random_function(d, rng);
    for (int grid : {0, grid_count(dim) - 1}) {
      const CubeTable a = cube_averages(f, YoungPhi(2, 1), grid, default_gens(d));
      const CubeTable b = cube_averages_reference(f, YoungPhi(2, 1), grid, default_gens(d));
      REQUIRE(a.values.size() == b.values.size());
      for (std::size_t g = 0; g < a.values.size(); ++g) {
        REQUIRE(a.values[g].size() == b.values[g].size());
        CHECK(std::memcmp(a.values[g].data(), b.values[g].data(), a.values[g].size() * sizeof(double)) == 0);
      }
    }
  }
}

TEST_CASE("full maximal sandwich") {
  const Domain d(1, 0, -2);
  const MaximalSandwich one = full_maximal(GridFunction::constant(d, 1.0), YoungPhi(1, 0));
  for (Index i = 0; i < 4; ++i) {
    CHECK(one.lower[i] == 1.0);
    CHECK(one.upper[i] == 3.0);
  }

  const Domain d64(1, 0, -6);
  std::vector<double> tail(64, 0.0);
  std::fill(tail.begin() + 48, tail.end(), 1.0);
  const GridFunction chi(d64, tail);
  const MaximalSandwich s = full_maximal(chi, YoungPhi(1, 0));
  const MaximalField g0 = dyadic_maximal(chi, YoungPhi(1, 0), 0);
  for (Index i = 0; i < chi.size(); ++i) {
    CHECK(s.lower[i] >= g0[i]);
    CHECK(s.upper[i] == 3.0 * s.lower[i]);
  }
  // The cell holding 0.7 sees a shifted cube reaching into [0.75, 1).
  CHECK(s.lower[44] > g0[44]);
}
