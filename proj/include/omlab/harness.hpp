#pragma once

// End-to-end checks: the mixed weak-type inequality and its sweeps, the M_r
// level-set identity, the L^p demonstration, and the audits that replay the
// proof's decomposition on concrete data.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "omlab/decomp.hpp"
#include "omlab/instances.hpp"
#include "omlab/orlicz.hpp"
#include "omlab/report.hpp"
#include "omlab/weights.hpp"
#include "omlab/young.hpp"

namespace omlab {

/// Which computable surrogate stands in for M_Φ: one dyadic grid, the max
/// over the shifted grids (pointwise below M_Φ), or 3^n times that (above).
enum class BoundSide { dyadic, lower, upper };

std::string to_string(BoundSide side);
BoundSide parse_side(const std::string& name);

struct InequalityRecord {
  double t = 0.0;
  double lhs = 0.0;  // uw({M(fv)/v > t})
  double rhs = 0.0;  // ∫ Φ(f v / t) u
  double ratio = 0.0;
  BoundSide side = BoundSide::lower;
};

/// The per-cell field standing in for M_Φ(fv) on the given side.
std::vector<double> maximal_surrogate(const GridFunction& fv, const YoungPhi& phi, BoundSide side,
                                      int grid = 0);

/// Record for one threshold from a precomputed surrogate field `m` of fv.
InequalityRecord mixed_record(const GridFunction& f, const GridFunction& u, const GridFunction& v,
                              const GridFunction& w, const YoungPhi& phi,
                              const std::vector<double>& m, double t, BoundSide side);

InequalityRecord mixed_inequality_ratio(const GridFunction& f, const GridFunction& u,
                                        const GridFunction& v, const YoungPhi& phi, double t,
                                        BoundSide side = BoundSide::lower, int grid = 0);

enum class SweepMode { theorem, conjecture };

struct SweepConfig {
  int dim = 1;
  int box_exp = 0;
  int cell_exp = -10;
  std::size_t instances = 200;
  std::uint64_t seed = 1;
  std::vector<double> r_values{1.0, 2.0};
  std::vector<double> delta_values{0.0, 1.0};
  std::vector<InstanceKind> kinds = all_kinds();
  double u_cap = 10.0;
  double vr_cap = 10.0;
  std::size_t thresholds = 12;
  double t_lo = 1e-3;  // thresholds span [t_lo, t_hi] · max(M/v)
  double t_hi = 1.0;
  BoundSide side = BoundSide::upper;
  SweepMode mode = SweepMode::theorem;
  bool refine = true;
  double stability = 0.10;              // allowed relative change of sup_ratio
  std::optional<double> sup_bound;      // asserted upper bound on sup_ratio
};

struct SweepRow {
  std::uint64_t seed = 0;
  InstanceKind kind = InstanceKind::constant;
  double r = 1.0;
  double delta = 0.0;
  double a1_u = 1.0;
  double a1_vr = 1.0;
  InequalityRecord record;
};

struct SweepReport {
  SweepConfig config;
  std::vector<SweepRow> rows;
  std::vector<SweepRow> refined_rows;
  double sup_ratio = 0.0;          // over finite ratios
  double refined_sup_ratio = 0.0;
  std::size_t infinite = 0;        // records with rhs = 0 < lhs

  bool all_finite() const noexcept { return infinite == 0; }
  bool stable() const;
  /// No verdict in conjecture mode.
  std::optional<bool> pass() const;
};

/// Instance i uses seed derive_seed(config.seed, i), (r, δ) cycling fastest
/// and the kind next. Instances run in parallel; rows keep instance order.
SweepReport sweep(const SweepConfig& config);

struct MaskComparison {
  Index mismatches = 0;
  Index level_set_cells = 0;
  bool equal() const noexcept { return mismatches == 0; }
};

/// {M_r(fv)/v > t} against {M((fv)^r)/v^r > t^r} on one dyadic grid.
MaskComparison mr_levelset_identity_check(const GridFunction& f, const GridFunction& v, double r,
                                          double t, int grid = 0);

struct LpReport {
  double lhs = 0.0;  // ∫ (M_r f)^p w
  double rhs = 0.0;  // ∫ f^p w
  double ratio = 0.0;
};

/// w = u v^(r-p), M_r over the shifted grids (lower side). Requires p > r.
LpReport lp_boundedness_check(const GridFunction& f, const GridFunction& u, const GridFunction& v,
                              double r, double p);

// ---------------------------------------------------------------------------
// Decomposition audits

struct AuditOptions {
  int grid = 0;
  /// g = f v / t. Default a ‖fv‖_{Φ,box} / min v, which puts the box
  /// average of g one level below the smallest value of v when δ = 0.
  std::optional<double> t;
  std::optional<double> a;
  std::optional<double> alpha;
  std::optional<double> p;
  std::optional<int> N;
  std::size_t max_samples = 4096;  // evaluation cells for the pointwise claims
};

/// Everything the proof fixes before the principal cubes: constants, the
/// levels N..k_max and the Γ-flagged Ω families on those levels.
struct AuditSetup {
  GridFunction f;
  GridFunction u;
  GridFunction v;
  GridFunction g;
  YoungPhi phi;
  double t = 1.0;
  AuditOptions options;
  A1Certificate a1_u;
  A1Certificate a1_v;
  A1Certificate a1_vr;
  AInfParams ainf_u;
  AInfParams ainf_vr;
  double a = 0.0;
  double alpha = 0.0;
  Lemma24Constant l24;
  double gamma = 0.0;
  int N = 0;
  int k_max = -1;
  MaximalField mdv;
  std::vector<OmegaFamily> families;  // levels N..k_max, ascending

  bool empty() const noexcept { return families.empty(); }
};

/// Defaults: p = 2/ε for the A∞ fit of v^r, α = (1+η)/2, a = 2^n + 1 when
/// δ = 0 and max(2^n, L) + 1 otherwise, and N the smallest level such that
/// the Ω cubes of every level from N to k_max lie inside the box. Below that
/// the zero extension, not the data, shapes the decomposition.
AuditSetup prepare_audit(const GridFunction& f, const GridFunction& u, const GridFunction& v,
                         const YoungPhi& phi, const AuditOptions& options = {});

AuditReport omega_audit(const AuditSetup& s);
AuditReport forest_audit(const AuditSetup& s, const PrincipalForest& forest);
/// The A∞ level-set bound for v^r on Γ cubes at the thresholds the proof uses.
AuditReport levelset_audit(const AuditSetup& s);
AuditReport lemma23_audit(const AuditSetup& s);
AuditReport lemma24_audit(const AuditSetup& s);

PrincipalForest build_forest(const AuditSetup& s);

struct ClaimAudit {
  AuditReport report;
  double gamma_sum = 0.0;      // Σ over Γ_N of v_k(Q) u(Q)/|Q|
  double principal_sum = 0.0;  // the same over P
  double claim1_ratio = 0.0;
  double claim1_constant = 0.0;
  double claim2_constant = 0.0;
  std::size_t samples = 0;
  std::size_t max_sequence = 0;  // longest k_m sequence seen
};

ClaimAudit claim_audits(const AuditSetup& s, const PrincipalForest& forest);

}  // namespace omlab
