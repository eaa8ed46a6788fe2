// Times the parallel cube-average kernel against the serial reference and
// confirms the two tables agree bit for bit.
//
//   bench_maximal [--quick]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include "omlab/orlicz.hpp"
#include "omlab/random.hpp"

using namespace omlab;

namespace {

GridFunction sample(const Domain& d, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(static_cast<std::size_t>(d.cell_count()));
  for (double& x : v) x = rng.coin(0.3) ? 0.0 : rng.uniform(0.0, 10.0);
  return GridFunction(d, std::move(v));
}

template <typename Fn>
double seconds(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool identical(const CubeTable& a, const CubeTable& b) {
  if (a.values.size() != b.values.size()) return false;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    if (a.values[i].size() != b.values[i].size()) return false;
    if (std::memcmp(a.values[i].data(), b.values[i].data(), a.values[i].size() * sizeof(double)) != 0) return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  const bool quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
  struct Case {
    int dim;
    int cell_exp;
    double r;
    double delta;
  };
  std::vector<Case> cases{{1, -14, 1, 0}, {1, -14, 2, 1}, {2, -7, 1, 1}, {3, -4, 2, 1}};
  if (quick) cases = {{1, -8, 1, 1}, {2, -4, 2, 1}};

  std::printf("threads=%d\n", omp_get_max_threads());
  std::printf("%-4s %-6s %-14s %-8s %-12s %-12s %-8s %s\n", "dim", "cells", "phi", "grid", "serial_s",
              "parallel_s", "speedup", "identical");
  bool all_same = true;
  for (const Case& c : cases) {
    const Domain d(c.dim, 0, c.cell_exp);
    const GridFunction f = sample(d, derive_seed(7, static_cast<std::uint64_t>(c.dim)));
    const YoungPhi phi(c.r, c.delta);
    for (int grid : {0, grid_count(c.dim) - 1}) {
      CubeTable ref;
      CubeTable par;
      const double ts = seconds([&] { ref = cube_averages_reference(f, phi, grid, default_gens(d)); });
      const double tp = seconds([&] { par = cube_averages(f, phi, grid, default_gens(d)); });
      const bool same = identical(ref, par);
      all_same = all_same && same;
      std::printf("%-4d %-6lld %-14s %-8d %-12.4f %-12.4f %-8.2f %s\n", c.dim, static_cast<long long>(d.cell_count()),
                  phi.to_string().c_str(), grid, ts, tp, ts / tp, same ? "yes" : "NO");
    }
  }
  return all_same ? 0 : 1;
}
