#pragma once

// Inequality checks and the audit reports that collect them.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace omlab {

/// Relative slack granted to real-valued inequalities assembled from
/// several floating-point quantities. Set and mask comparisons are exact.
inline constexpr double kCheckTol = 1e-12;

/// One asserted inequality lhs <= rhs.
struct Check {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string witness;
  bool pass = true;

  double slack() const noexcept { return rhs - lhs; }
};

inline bool within(double lhs, double rhs, double tol = kCheckTol) noexcept {
  if (lhs <= rhs) return true;
  if (!std::isfinite(lhs) || !std::isfinite(rhs)) return false;
  return lhs - rhs <= tol * std::max(std::fabs(lhs), std::fabs(rhs));
}

inline Check make_check(std::string name, double lhs, double rhs, std::string witness = {},
                        double tol = kCheckTol) {
  const bool ok = within(lhs, rhs, tol);
  return Check{std::move(name), lhs, rhs, std::move(witness), ok};
}

/// Exact comparison, for quantities that are counts or set measures.
inline Check make_exact_check(std::string name, double lhs, double rhs, std::string witness = {}) {
  return Check{std::move(name), lhs, rhs, std::move(witness), lhs <= rhs};
}

struct AuditReport {
  std::vector<Check> checks;

  void add(Check c) { checks.push_back(std::move(c)); }
  void append(const AuditReport& other) {
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
  }
  bool pass() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
  std::size_t violations() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(checks.begin(), checks.end(), [](const Check& c) { return !c.pass; }));
  }
  /// Smallest rhs - lhs over all checks; +inf when empty.
  double min_slack() const noexcept {
    double s = INFINITY;
    for (const Check& c : checks) s = std::min(s, c.slack());
    return s;
  }

  /// One check per distinct name, in first-seen order: a failing one if any
  /// failed, else the one with the largest lhs/rhs.
  AuditReport worst_per_name() const {
    AuditReport out;
    for (const Check& c : checks) {
      auto it = std::find_if(out.checks.begin(), out.checks.end(),
                             [&](const Check& o) { return o.name == c.name; });
      if (it == out.checks.end()) {
        out.checks.push_back(c);
      } else if (worse(c, *it)) {
        *it = c;
      }
    }
    return out;
  }

 private:
  static double tightness(const Check& c) noexcept {
    if (c.rhs > 0.0) return c.lhs / c.rhs;
    return c.lhs > 0.0 ? INFINITY : -INFINITY;
  }
  static bool worse(const Check& a, const Check& b) noexcept {
    if (a.pass != b.pass) return !a.pass;
    return tightness(a) > tightness(b);
  }
};

}  // namespace omlab
