#pragma once

// Muckenhoupt constants, A∞ parameter fitting, the level-set bound for A∞
// weights, and the b_k = 1/Φ(a^-k) sequence with its truncated weights.
//
// Scan domains:
//   * A1 scans every cube of the selected grids that meets the box, with the
//     average taken over the whole cube (the weight is zero outside) and the
//     infimum over the cube's box cells. This is the constant for which
//     M_D w <= [w] w holds on every cell.
//   * A_p and A∞ scan the cubes lying inside the box.

#include <cstddef>
#include <vector>

#include "omlab/geometry.hpp"
#include "omlab/orlicz.hpp"
#include "omlab/report.hpp"
#include "omlab/young.hpp"

namespace omlab {

struct A1Certificate {
  double constant = 1.0;
  DyadicCube witness;
  std::vector<int> grids;
};

/// Throws std::invalid_argument on a zero cell.
A1Certificate a1_constant(const GridFunction& w, const std::vector<int>& grids, GenRange gens);
A1Certificate a1_constant(const GridFunction& w, const std::vector<int>& grids = {0});

/// max over in-box cubes of avg(w) · avg(w^(1-p'))^(p-1). Requires p > 1.
double ap_constant(const GridFunction& w, double p, const std::vector<int>& grids = {0});

struct AInfParams {
  double C = 1.0;
  double eps = 0.5;
  bool exhaustive = true;
  std::size_t pairs = 0;

  double xi() const noexcept { return 1.0 / (1.0 - eps) - 1.0; }
  double C0() const noexcept;
};

/// Fits w(E)/w(Q) <= C (|E|/|Q|)^eps over in-box cubes Q and the superlevel
/// sets E of w within Q, minimizing C^(1/(1-eps)). At most `budget` pairs
/// are scanned; past that the fit is flagged non-exhaustive.
AInfParams ainf_params(const GridFunction& w, const std::vector<int>& grids = {0},
                       std::size_t budget = 50'000'000);

/// C for a fixed eps over the pairs of `w`, the smallest valid constant.
double ainf_constant_at(const GridFunction& w, double eps, const std::vector<int>& grids = {0});

/// |{w > λ} ∩ Q| <= C0 |Q| ((1/(λ|Q|)) ∫_Q w)^(1+ξ).
Check levelset_bound_check(const GridFunction& w, const DyadicCube& q, double lambda,
                           const AInfParams& params);

/// b_k = 1/Φ(a^-k) over an integer range, with the ratio bounds
/// a^r <= b_{k+1}/b_k <= Φ(a) checked for every adjacent pair.
class BkSequence {
 public:
  BkSequence(double a, YoungPhi phi, int k_lo, int k_hi);

  double a() const noexcept { return a_; }
  const YoungPhi& phi() const noexcept { return phi_; }
  int k_lo() const noexcept { return k_lo_; }
  int k_hi() const noexcept { return k_hi_; }

  double value(int k) const;
  double log_value(int k) const;
  /// b_{k+1}/b_k in closed form: a^r ((1+log⁺a^-k)/(1+log⁺a^-(k+1)))^δ.
  double ratio(int k) const;

  const AuditReport& report() const noexcept { return report_; }
  /// Indices k where a bound holds with equality.
  const std::vector<int>& lower_attained() const noexcept { return lower_; }
  const std::vector<int>& upper_attained() const noexcept { return upper_; }

 private:
  double a_;
  YoungPhi phi_;
  int k_lo_;
  int k_hi_;
  AuditReport report_;
  std::vector<int> lower_;
  std::vector<int> upper_;
};

/// b_k and log b_k without building a sequence.
double bk_value(double a, const YoungPhi& phi, int k);
double bk_log(double a, const YoungPhi& phi, int k);

/// Cellwise min(v^r, cap).
GridFunction truncate(const GridFunction& v, double r, double cap);

}  // namespace omlab
