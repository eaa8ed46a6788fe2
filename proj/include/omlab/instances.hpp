#pragma once

// Seeded test instances (f, u, v) with certified A1 constants for u and v^r.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "omlab/geometry.hpp"
#include "omlab/weights.hpp"
#include "omlab/young.hpp"

namespace omlab {

enum class InstanceKind { constant, step, staircase, spike, random_bounded };

std::string to_string(InstanceKind kind);
/// Accepts "constant", "step", "staircase", "spike", "random-bounded".
InstanceKind parse_kind(const std::string& name);
const std::vector<InstanceKind>& all_kinds();

struct InstanceParams {
  double r = 1.0;
  double u_cap = 10.0;   // bound on [u]_A1
  double vr_cap = 10.0;  // bound on [v^r]_A1; infinity disables the cap
  std::vector<int> grids{0};
  /// Overrides the seeded strength: step height, staircase exponent, spike
  /// height or random amplitude, applied to both weights.
  std::optional<double> strength;
  int max_attempts = 40;
};

struct Instance {
  InstanceKind kind = InstanceKind::constant;
  std::uint64_t seed = 0;
  GridFunction f;
  GridFunction u;
  GridFunction v;
  A1Certificate a1_u;
  A1Certificate a1_vr;
};

/// Deterministic in (kind, domain, params, seed). Weights whose constants
/// exceed the caps are regenerated with halved strength; throws
/// std::runtime_error when `max_attempts` halvings do not suffice.
Instance gen_instance(InstanceKind kind, const Domain& d, const InstanceParams& params,
                      std::uint64_t seed);

}  // namespace omlab
