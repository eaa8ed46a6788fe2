#include "omlab/instances.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "omlab/random.hpp"

namespace omlab {

namespace {

struct KindName {
  InstanceKind kind;
  const char* name;
};

constexpr KindName kNames[] = {
    {InstanceKind::constant, "constant"},   {InstanceKind::step, "step"},
    {InstanceKind::staircase, "staircase"}, {InstanceKind::spike, "spike"},
    {InstanceKind::random_bounded, "random-bounded"},
};

/// Cube of `side` cells per axis at a seeded position, as a cell box.
CellBox random_block(const Domain& d, Rng& rng, Index side) {
  CellBox b;
  for (int i = 0; i < kMaxDim; ++i) {
    if (i < d.dim()) {
      b.lo[i] = side * rng.integer(0, d.cells_per_axis() / side - 1);
      b.hi[i] = b.lo[i] + side;
    } else {
      b.lo[i] = 0;
      b.hi[i] = 1;
    }
  }
  return b;
}

bool in_block(const CellBox& b, const Coords& c, int dim) {
  for (int i = 0; i < dim; ++i) {
    if (c[i] < b.lo[i] || c[i] >= b.hi[i]) return false;
  }
  return true;
}

/// Seeded randomness of one weight, fixed before strength is chosen.
struct WeightDraw {
  double strength = 1.0;
  bool first_quarter = false;  // step
  Coords center{};             // staircase
  CellBox block;               // spike
  std::vector<double> noise;   // random-bounded
};

WeightDraw draw_weight(InstanceKind kind, const Domain& d, Rng& rng, bool is_u) {
  WeightDraw w;
  w.first_quarter = is_u;
  switch (kind) {
    case InstanceKind::constant:
      break;
    case InstanceKind::step:
      w.strength = rng.uniform(1.5, 8.0);
      break;
    case InstanceKind::staircase:
      w.strength = rng.uniform(0.2, 0.95 * d.dim());
      for (int i = 0; i < d.dim(); ++i) w.center[i] = rng.integer(0, d.cells_per_axis() - 1);
      break;
    case InstanceKind::spike: {
      w.strength = rng.uniform(2.0, 20.0);
      const int g = static_cast<int>(rng.integer(0, std::max(0, d.levels() - 2)));
      w.block = random_block(d, rng, Index{1} << g);
      break;
    }
    case InstanceKind::random_bounded:
      w.strength = rng.uniform(0.5, 12.0);
      w.noise.resize(static_cast<std::size_t>(d.cell_count()));
      for (double& x : w.noise) x = rng.unit();
      break;
  }
  return w;
}

GridFunction shape(InstanceKind kind, const Domain& d, const WeightDraw& w, double s) {
  std::vector<double> out(static_cast<std::size_t>(d.cell_count()), 1.0);
  const Index n = d.cells_per_axis();
  for (Index i = 0; i < d.cell_count(); ++i) {
    const Coords c = d.cell_coords(i);
    double& x = out[static_cast<std::size_t>(i)];
    switch (kind) {
      case InstanceKind::constant:
        break;
      case InstanceKind::step: {
        const bool on = w.first_quarter ? c[0] < n / 4 : c[0] >= n - n / 4;
        if (on) x = s;
        break;
      }
      case InstanceKind::staircase: {
        // Depth of the smallest grid-0 cube shared with the center.
        int g = 0;
        while (g < d.levels()) {
          bool same = true;
          for (int a = 0; a < d.dim(); ++a) same = same && (c[a] >> g) == (w.center[a] >> g);
          if (same) break;
          ++g;
        }
        x = std::exp2(s * (d.levels() - g));
        break;
      }
      case InstanceKind::spike:
        if (in_block(w.block, c, d.dim())) x = 1.0 + s;
        break;
      case InstanceKind::random_bounded:
        x = 1.0 + s * w.noise[static_cast<std::size_t>(i)];
        break;
    }
  }
  return GridFunction(d, std::move(out));
}

double weaken(InstanceKind kind, double s) {
  return kind == InstanceKind::step ? 1.0 + 0.5 * (s - 1.0) : 0.5 * s;
}

/// Regenerates with weaker strength until `constant_of` is within `cap`.
GridFunction certified(InstanceKind kind, const Domain& d, const WeightDraw& w,
                       const InstanceParams& p, double cap,
                       const std::function<A1Certificate(const GridFunction&)>& constant_of,
                       A1Certificate& cert) {
  double s = p.strength.value_or(w.strength);
  for (int attempt = 0; attempt < p.max_attempts; ++attempt) {
    GridFunction x = shape(kind, d, w, s);
    cert = constant_of(x);
    if (cert.constant <= cap) return x;
    s = weaken(kind, s);
  }
  throw std::runtime_error("instance generator could not meet the A1 cap");
}

}  // namespace

std::string to_string(InstanceKind kind) {
  for (const auto& kn : kNames) {
    if (kn.kind == kind) return kn.name;
  }
  throw std::logic_error("unknown instance kind");
}

InstanceKind parse_kind(const std::string& name) {
  for (const auto& kn : kNames) {
    if (name == kn.name) return kn.kind;
  }
  throw std::invalid_argument("unknown instance kind: " + name);
}

const std::vector<InstanceKind>& all_kinds() {
  static const std::vector<InstanceKind> kinds{InstanceKind::constant, InstanceKind::step,
                                               InstanceKind::staircase, InstanceKind::spike,
                                               InstanceKind::random_bounded};
  return kinds;
}

Instance gen_instance(InstanceKind kind, const Domain& d, const InstanceParams& params,
                      std::uint64_t seed) {
  Rng rng(seed);

  std::vector<double> fv(static_cast<std::size_t>(d.cell_count()), 0.0);
  if (kind == InstanceKind::spike) {
    const int g = static_cast<int>(rng.integer(0, std::max(0, d.levels() - 2)));
    const CellBox b = random_block(d, rng, Index{1} << g);
    const double height = rng.uniform(1.0, 10.0);
    for (Index i = 0; i < d.cell_count(); ++i) {
      if (in_block(b, d.cell_coords(i), d.dim())) fv[static_cast<std::size_t>(i)] = height;
    }
  } else {
    for (double& x : fv) x = rng.coin(0.5) ? rng.uniform(0.0, 10.0) : 0.0;
  }

  const WeightDraw wu = draw_weight(kind, d, rng, true);
  const WeightDraw wv = draw_weight(kind, d, rng, false);
  const YoungPhi power(params.r);

  A1Certificate a1_u;
  A1Certificate a1_vr;
  GridFunction u = certified(
      kind, d, wu, params, params.u_cap,
      [&](const GridFunction& x) { return a1_constant(x, params.grids); }, a1_u);
  GridFunction v = certified(
      kind, d, wv, params, params.vr_cap,
      [&](const GridFunction& x) {
        return a1_constant(transform(x, [&](double y) { return power.power(y); }), params.grids);
      },
      a1_vr);
  return Instance{kind, seed, GridFunction(d, std::move(fv)), std::move(u), std::move(v),
                  std::move(a1_u), std::move(a1_vr)};
}

}  // namespace omlab
