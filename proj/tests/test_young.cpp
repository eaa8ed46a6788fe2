#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "omlab/young.hpp"

using namespace omlab;
using std::numbers::e;

TEST_CASE("phi_eval") {
  CHECK(phi_eval(YoungPhi(2, 0), 3.0) == 9.0);
  CHECK(phi_eval(YoungPhi(1, 1), e) == doctest::Approx(2 * e).epsilon(1e-15));
  CHECK(phi_eval(YoungPhi(1, 1), 2.0) == doctest::Approx(3.38629436111989).epsilon(1e-14));
  CHECK(phi_eval(YoungPhi(3, 2), 0.0) == 0.0);
  CHECK(phi_eval(YoungPhi(1, 2), 0.5) == 0.5);  // log⁺ vanishes below 1
  CHECK_THROWS_AS(phi_eval(YoungPhi(1, 1), -1.0), std::invalid_argument);
  CHECK_THROWS_AS(phi_eval(YoungPhi(1, 1), INFINITY), std::invalid_argument);
  CHECK_THROWS_AS(YoungPhi(0.5, 0), std::invalid_argument);
  CHECK_THROWS_AS(YoungPhi(1, -1), std::invalid_argument);
}

TEST_CASE("phi parse and print") {
  const YoungPhi p = YoungPhi::parse("r=2,delta=1.5");
  CHECK(p.r() == 2.0);
  CHECK(p.delta() == 1.5);
  CHECK(YoungPhi::parse(p.to_string()) == p);
  CHECK(YoungPhi::parse("r=2") == YoungPhi(2, 0));
  CHECK_THROWS(YoungPhi::parse("r=2x"));
  CHECK_THROWS(YoungPhi::parse("s=1"));
}

TEST_CASE("phi_inverse") {
  CHECK(phi_inverse(YoungPhi(2, 0), 4.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(phi_inverse(YoungPhi(1, 1), 2 * e) == doctest::Approx(e).epsilon(1e-12));
  const double t = phi_inverse(YoungPhi(1, 1), 10.0);
  CHECK(t == doctest::Approx(4.13366052428843).epsilon(1e-12));
  CHECK(t * (1 + std::log(t)) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(phi_inverse(YoungPhi(1, 1), 0.0) == 0.0);
  for (double y : {1e-8, 0.3, 1.0, 7.0, 1e6}) {
    const YoungPhi phi(2, 2);
    CHECK(phi(phi_inverse(phi, y)) == doctest::Approx(y).epsilon(1e-11));
  }
}

TEST_CASE("conjugate_weight") {
  const Domain d(1, 0, -1);
  CHECK(conjugate_weight(GridFunction::constant(d, 1.0), YoungPhi(3, 2))[0] == 1.0);
  CHECK(conjugate_weight(GridFunction::constant(d, 2.0), YoungPhi(1, 1))[1] == 2.0);
  CHECK(conjugate_weight(GridFunction::constant(d, 0.5), YoungPhi(1, 1))[0] ==
        doctest::Approx(0.295308054574821).epsilon(1e-14));
  CHECK(conjugate_weight(GridFunction::constant(d, 0.5), YoungPhi(2, 0))[0] == 0.25);
  CHECK_THROWS_AS(conjugate_weight(GridFunction(d, {1.0, 0.0}), YoungPhi()), std::invalid_argument);
}

TEST_CASE("power_bound_constant") {
  CHECK(power_bound_constant(YoungPhi(2, 0), 0.3).constant == 1.0);
  CHECK(power_bound_constant(YoungPhi(1, 1), 0.5).constant == 2.0);
  const PowerBound b = power_bound_constant(YoungPhi(1, 2), 1.0);
  CHECK(b.constant == 4.0);
  CHECK(b.max_ratio <= 1.0);
  CHECK(b.samples > 0);
  CHECK_THROWS_AS(power_bound_constant(YoungPhi(1, 1), 0.0), std::invalid_argument);
}

TEST_CASE("submultiplicativity") {
  const std::pair<double, double> ones[] = {{1.0, 1.0}};
  CHECK(check_submultiplicative(YoungPhi(1, 1), ones).max_ratio == 1.0);
  const std::pair<double, double> ee[] = {{e, e}};
  CHECK(check_submultiplicative(YoungPhi(1, 1), ee).max_ratio == doctest::Approx(0.75).epsilon(1e-14));
  for (const YoungPhi& phi : {YoungPhi(1, 0), YoungPhi(1, 1), YoungPhi(2, 2), YoungPhi(3, 0.5)}) {
    const SubmultiplicativeReport rep = check_submultiplicative(phi, 17, 10'000);
    CHECK(rep.holds);
    CHECK(rep.max_ratio <= 1.0 + 1e-12);
    CHECK(rep.samples >= 10'000);
  }
}
