#include <doctest.h>

#include <numbers>
#include <stdexcept>

#include "omlab/instances.hpp"
#include "omlab/random.hpp"
#include "omlab/weights.hpp"

using namespace omlab;
using std::numbers::e;

TEST_CASE("A1 constant") {
  const Domain d(1, 0, -2);
  const A1Certificate flat = a1_constant(GridFunction::constant(d, 5.0));
  CHECK(flat.constant == 1.0);

  const GridFunction w(d, {1, 1, 1, 2});
  const A1Certificate c = a1_constant(w);
  CHECK(c.constant == 1.5);
  CHECK(c.witness == DyadicCube{0, -1, {1}});
  CHECK(to_string(c.witness, 1) == "0:-1:1");

  const A1Certificate sq = a1_constant(transform(w, [](double x) { return x * x; }));
  CHECK(sq.constant == 2.5);
  CHECK_THROWS_AS(a1_constant(GridFunction(d, {1, 0, 1, 1})), std::invalid_argument);
}

TEST_CASE("A1 constant bounds the maximal function") {
  Rng rng(4);
  const Domain d(2, 0, -4);
  std::vector<double> v(static_cast<std::size_t>(d.cell_count()));
  for (double& x : v) x = rng.uniform(0.5, 3.0);
  const GridFunction w(d, v);
  const A1Certificate c = a1_constant(w);
  const MaximalField m = dyadic_maximal(w, YoungPhi(1, 0), 0);
  for (Index i = 0; i < w.size(); ++i) CHECK(m[i] <= c.constant * w[i] * (1 + 1e-12));
}

TEST_CASE("A_p constant") {
  const Domain d1(1, 0, -1);
  CHECK(ap_constant(GridFunction::constant(d1, 1.0), 2.0) == 1.0);
  CHECK(ap_constant(GridFunction(d1, {1, 4}), 2.0) == doctest::Approx(1.5625).epsilon(1e-15));
  CHECK_THROWS_AS(ap_constant(GridFunction(d1, {1, 4}), 1.0), std::invalid_argument);
  // A2 membership implies A3 membership.
  Rng rng(2);
  const Domain d(1, 0, -6);
  std::vector<double> v(static_cast<std::size_t>(d.cell_count()));
  for (double& x : v) x = rng.uniform(0.2, 5.0);
  const GridFunction w(d, v);
  CHECK(std::isfinite(ap_constant(w, 2.0)));
  CHECK(std::isfinite(ap_constant(w, 3.0)));
}

TEST_CASE("A-infinity fit") {
  const Domain d(1, 0, -2);
  const AInfParams flat = ainf_params(GridFunction::constant(d, 1.0));
  CHECK(flat.C == 1.0);

  const GridFunction w(d, {1, 1, 1, 2});
  const AInfParams p = ainf_params(w);
  CHECK(p.exhaustive);
  CHECK(p.C >= 1.0);
  // The pair ([0,1), [0.75,1)) alone forces C >= 0.4 / 0.25^eps.
  CHECK(p.C >= 0.4 / std::pow(0.25, p.eps) * (1 - 1e-12));
  CHECK(ainf_constant_at(w, 0.5) >= 0.8);

  // Resample pairs (Q, E) with E a union of cells and recheck the fit.
  Rng rng(6);
  const Domain d6(1, 0, -6);
  std::vector<double> v(static_cast<std::size_t>(d6.cell_count()));
  for (double& x : v) x = rng.uniform(0.5, 4.0);
  const GridFunction w6(d6, v);
  const AInfParams q = ainf_params(w6);
  int bad = 0;
  for (int i = 0; i < 10'000; ++i) {
    const int gen = static_cast<int>(rng.integer(-6, 0));
    const Index side = Index{1} << (gen + 6);
    const Index j = rng.integer(0, (64 / side) - 1);
    double wq = 0, we = 0;
    Index cells = 0;
    for (Index c = j * side; c < (j + 1) * side; ++c) {
      wq += v[static_cast<std::size_t>(c)];
      if (rng.coin(0.3)) {
        we += v[static_cast<std::size_t>(c)];
        ++cells;
      }
    }
    if (cells == 0) continue;
    if (we / wq > q.C * std::pow(static_cast<double>(cells) / static_cast<double>(side), q.eps) * (1 + 1e-12)) ++bad;
  }
  CHECK(bad == 0);
}

TEST_CASE("A-infinity level-set bound") {
  const Domain d(1, 0, -2);
  const DyadicCube box{0, 0, {0}};
  const GridFunction one = GridFunction::constant(d, 1.0);
  const AInfParams flat = ainf_params(one);
  const Check above = levelset_bound_check(one, box, 2.0, flat);
  CHECK(above.lhs == 0.0);
  CHECK(above.pass);
  const Check below = levelset_bound_check(one, box, 0.5, flat);
  CHECK(below.lhs == 1.0);
  CHECK(below.pass);

  const GridFunction w(d, {1, 1, 1, 2});
  const Check c = levelset_bound_check(w, box, 1.5, ainf_params(w));
  CHECK(c.lhs == 0.25);
  CHECK(c.pass);
  CHECK(c.slack() >= 0.0);
}

TEST_CASE("b_k sequence") {
  const BkSequence flat(4.0, YoungPhi(1, 0), -5, 5);
  CHECK(flat.report().pass());
  for (int k = -5; k < 5; ++k) CHECK(flat.ratio(k) == 4.0);
  CHECK(flat.value(3) == 64.0);

  const BkSequence s(e, YoungPhi(1, 1), -4, 4);
  CHECK(s.report().pass());
  CHECK(s.value(0) / s.value(-1) == doctest::Approx(2 * e).epsilon(1e-14));
  CHECK(s.ratio(-1) == doctest::Approx(2 * e).epsilon(1e-14));
  CHECK(s.ratio(3) == doctest::Approx(e).epsilon(1e-15));
  CHECK(std::find(s.upper_attained().begin(), s.upper_attained().end(), -1) != s.upper_attained().end());
  CHECK(bk_log(e, YoungPhi(1, 1), 2) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(BkSequence(1.0, YoungPhi(), 0, 1), std::invalid_argument);
}

TEST_CASE("truncate") {
  const Domain d(1, 0, -1);
  const GridFunction v(d, {1, 2});
  CHECK(truncate(v, 2, 3).values()[0] == 1.0);
  CHECK(truncate(v, 2, 3).values()[1] == 3.0);
  CHECK(truncate(v, 2, 1e300).values()[1] == 4.0);
  CHECK(truncate(v, 2, 0.5).values()[0] == 0.5);
}

TEST_CASE("generated instances") {
  const Domain d(1, 0, -2);
  InstanceParams p;
  p.strength = 2.0;
  const Instance step = gen_instance(InstanceKind::step, d, p, 1);
  CHECK(step.v.values()[3] == 2.0);
  CHECK(a1_constant(step.v).constant == 1.5);

  const Instance flat = gen_instance(InstanceKind::constant, Domain(2, 0, -3), InstanceParams{}, 4);
  CHECK(flat.u.min_value() == 1.0);
  CHECK(flat.u.max_value() == 1.0);
  CHECK(flat.v.max_value() == 1.0);
  CHECK(flat.a1_u.constant == 1.0);

  const Domain d10(1, 0, -10);
  for (InstanceKind kind : all_kinds()) {
    InstanceParams q;
    q.r = 2;
    const Instance a = gen_instance(kind, d10, q, 77);
    const Instance b = gen_instance(kind, d10, q, 77);
    CHECK(std::equal(a.f.values().begin(), a.f.values().end(), b.f.values().begin()));
    CHECK(std::equal(a.u.values().begin(), a.u.values().end(), b.u.values().begin()));
    CHECK(std::equal(a.v.values().begin(), a.v.values().end(), b.v.values().begin()));
    CHECK(a.a1_u.constant <= q.u_cap);
    CHECK(a.a1_vr.constant <= q.vr_cap);
    CHECK(parse_kind(to_string(kind)) == kind);
  }
}
