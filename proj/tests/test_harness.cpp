#include <doctest.h>

#include <stdexcept>

#include "omlab/harness.hpp"
#include "omlab/random.hpp"

using namespace omlab;

TEST_CASE("mixed inequality, hand example") {
  const Domain d(1, 0, -2);
  const GridFunction one = GridFunction::constant(d, 1.0);
  const GridFunction chi(d, {0, 0, 0, 1});
  const InequalityRecord rec = mixed_inequality_ratio(chi, one, one, YoungPhi(1, 0), 1.0 / 3, BoundSide::dyadic);
  CHECK(rec.lhs == 0.5);
  CHECK(rec.rhs == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(rec.ratio == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(rec.side == BoundSide::dyadic);

  const InequalityRecord zero =
      mixed_inequality_ratio(GridFunction::constant(d, 0.0), one, one, YoungPhi(1, 1), 1.0);
  CHECK(zero.lhs == 0.0);
  CHECK(zero.rhs == 0.0);
  CHECK(zero.ratio == 0.0);
  CHECK_THROWS_AS(mixed_inequality_ratio(chi, one, one, YoungPhi(), 0.0), std::invalid_argument);
}

TEST_CASE("mixed inequality is scale invariant when delta = 0") {
  Rng rng(12);
  const Domain d(1, 0, -6);
  std::vector<double> fv(64), uv(64), vv(64);
  for (std::size_t i = 0; i < 64; ++i) {
    fv[i] = rng.uniform(0, 3);
    uv[i] = rng.uniform(1, 2);
    vv[i] = rng.uniform(1, 2);
  }
  const GridFunction f(d, fv), u(d, uv), v(d, vv);
  const GridFunction f4 = transform(f, [](double x) { return 4 * x; });
  for (BoundSide side : {BoundSide::dyadic, BoundSide::lower, BoundSide::upper}) {
    const InequalityRecord a = mixed_inequality_ratio(f, u, v, YoungPhi(2, 0), 0.5, side);
    const InequalityRecord b = mixed_inequality_ratio(f4, u, v, YoungPhi(2, 0), 2.0, side);
    CHECK(b.ratio == doctest::Approx(a.ratio).epsilon(1e-12));
  }
}

TEST_CASE("upper side is the conservative one") {
  const Instance inst = gen_instance(InstanceKind::spike, Domain(2, 0, -4), InstanceParams{}, 9);
  const InequalityRecord lo = mixed_inequality_ratio(inst.f, inst.u, inst.v, YoungPhi(1, 1), 0.2, BoundSide::lower);
  const InequalityRecord hi = mixed_inequality_ratio(inst.f, inst.u, inst.v, YoungPhi(1, 1), 0.2, BoundSide::upper);
  CHECK(hi.lhs >= lo.lhs);
  CHECK(hi.rhs == lo.rhs);
  CHECK(parse_side(to_string(BoundSide::upper)) == BoundSide::upper);
}

TEST_CASE("M_r level sets") {
  const Domain d(1, 0, -2);
  const GridFunction f(d, {0, 0, 0, 8});
  const GridFunction v(d, {1, 1, 1, 2});
  const MaskComparison m = mr_levelset_identity_check(f, v, 2.0, 1.0);
  CHECK(m.equal());
  CHECK(m.level_set_cells > 0);
  CHECK(mr_levelset_identity_check(f, v, 1.0, 0.7).equal());
}

TEST_CASE("L^p demonstration") {
  const Domain d(1, 0, -4);
  const GridFunction one = GridFunction::constant(d, 1.0);
  const LpReport flat = lp_boundedness_check(one, one, one, 1.0, 2.0);
  CHECK(flat.ratio == doctest::Approx(1.0).epsilon(1e-13));
  CHECK_THROWS_AS(lp_boundedness_check(one, one, one, 2.0, 2.0), std::invalid_argument);

  std::vector<double> spike(16, 0.0);
  spike[5] = 10.0;
  const GridFunction f(d, spike);
  const LpReport coarse = lp_boundedness_check(f, one, one, 1.0, 2.0);
  const LpReport fine = lp_boundedness_check(f.refined(), one.refined(), one.refined(), 1.0, 2.0);
  CHECK(std::isfinite(coarse.ratio));
  CHECK(fine.ratio / coarse.ratio < 2.0);
  CHECK(coarse.ratio / fine.ratio < 2.0);
}

TEST_CASE("small sweep") {
  SweepConfig cfg;
  cfg.cell_exp = -6;
  cfg.instances = 20;
  cfg.thresholds = 5;
  const SweepReport a = sweep(cfg);
  CHECK(a.rows.size() == 100);
  CHECK(a.refined_rows.size() == 100);
  CHECK(a.all_finite());
  REQUIRE(a.pass().has_value());
  CHECK(*a.pass());

  const SweepReport b = sweep(cfg);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].record.ratio == b.rows[i].record.ratio);
    CHECK(a.rows[i].seed == b.rows[i].seed);
  }

  cfg.mode = SweepMode::conjecture;
  CHECK_FALSE(sweep(cfg).pass().has_value());
  cfg.thresholds = 0;
  CHECK_THROWS_AS(sweep(cfg), std::invalid_argument);
}

TEST_CASE("audits on a generated instance") {
  const Domain d(1, 0, -8);
  InstanceParams params;
  const Instance inst = gen_instance(InstanceKind::staircase, d, params, 5);
  const AuditSetup s = prepare_audit(inst.f, inst.u, inst.v, YoungPhi(1, 0));
  REQUIRE(!s.empty());
  CHECK(s.a == 3.0);  // 2^n + 1
  CHECK(s.alpha > 1.0);
  CHECK(s.N <= s.k_max);
  CHECK(omega_audit(s).pass());
  CHECK(levelset_audit(s).pass());
  CHECK(lemma23_audit(s).pass());
  CHECK(lemma24_audit(s).pass());
  const PrincipalForest forest = build_forest(s);
  CHECK(forest_audit(s, forest).pass());
  const ClaimAudit claims = claim_audits(s, forest);
  CHECK(claims.report.pass());
  CHECK(std::isfinite(claims.claim1_ratio));

  AuditOptions bad;
  bad.alpha = 0.5;
  CHECK_THROWS_AS(prepare_audit(inst.f, inst.u, inst.v, YoungPhi(1, 0), bad), std::invalid_argument);
}
