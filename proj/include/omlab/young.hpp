#pragma once

// The Young functions Φ(t) = t^r (1 + log⁺ t)^δ with r >= 1, δ >= 0 and the
// natural logarithm.

#include <cstdint>
#include <span>
#include <string>
#include <utility>

#include "omlab/geometry.hpp"

namespace omlab {

class YoungPhi {
 public:
  /// Throws std::invalid_argument unless r >= 1 and delta >= 0.
  YoungPhi(double r = 1.0, double delta = 0.0);

  double r() const noexcept { return r_; }
  double delta() const noexcept { return delta_; }
  bool is_power() const noexcept { return delta_ == 0.0; }

  double operator()(double t) const noexcept;
  /// t^r, with the same arithmetic Φ uses for its power factor.
  double power(double t) const noexcept;
  /// x^δ, with the same arithmetic Φ uses for its logarithmic factor.
  double log_power(double x) const noexcept;

  /// "r=R,delta=D"
  static YoungPhi parse(const std::string& text);
  std::string to_string() const;

  friend bool operator==(const YoungPhi&, const YoungPhi&) = default;

 private:
  double r_;
  double delta_;
};

/// Φ(t); throws for negative or non-finite t.
double phi_eval(const YoungPhi& phi, double t);

/// The t >= 0 with Φ(t) = y, to 1e-12 relative.
double phi_inverse(const YoungPhi& phi, double y);

/// Cellwise w = 1 / Φ(1/v); requires v > 0 on every cell.
GridFunction conjugate_weight(const GridFunction& v, const YoungPhi& phi);

struct PowerBound {
  double constant;   // max{(δ/ε)^δ, 1}
  double max_ratio;  // max over samples t >= 1 of Φ(t) / (C t^(r+ε)); <= 1
  std::size_t samples;
};

/// Constant C with Φ(t) <= C t^(r+eps) for t >= 1, confirmed on a sample grid.
/// Throws std::logic_error if the sampled bound fails.
PowerBound power_bound_constant(const YoungPhi& phi, double eps);

struct SubmultiplicativeReport {
  double max_ratio = 0.0;  // max Φ(st) / (Φ(s)Φ(t)) over pairs with Φ(s)Φ(t) > 0
  std::size_t samples = 0;
  bool holds = true;
};

SubmultiplicativeReport check_submultiplicative(const YoungPhi& phi,
                                                std::span<const std::pair<double, double>> pairs);
/// Seeded pairs (s, t) log-uniform over [1e-6, 1e6] plus the points 0 and 1.
SubmultiplicativeReport check_submultiplicative(const YoungPhi& phi, std::uint64_t seed,
                                                std::size_t count);

}  // namespace omlab
