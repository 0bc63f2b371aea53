#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "schrodinger/error.hpp"
#include "schrodinger/extnum.hpp"

using namespace schrodinger;

TEST_SUITE("extnum") {
  TEST_CASE("inverse follows the conventions on [0, inf]") {
    CHECK(inv_ext(ExtReal(0.0)).is_inf());
    CHECK(inv_ext(ExtReal::infinity()) == ExtReal::zero());
    CHECK(inv_ext(ExtReal(2.0)).value() == 0.5);
  }

  TEST_CASE("product with a zero finite factor is zero") {
    CHECK(mul_ext(0.0, ExtReal::infinity()) == ExtReal::zero());
    CHECK(mul_ext(3.0, ExtReal(2.0)).value() == 6.0);
    CHECK(mul_ext(5.0, ExtReal::infinity()).is_inf());
  }

  TEST_CASE("mul_ext rejects invalid finite factors") {
    CHECK_THROWS_AS(mul_ext(-1.0, ExtReal(1.0)), DomainError);
    CHECK_THROWS_AS(mul_ext(std::nan(""), ExtReal(1.0)), DomainError);
    CHECK_THROWS_AS(mul_ext(std::numeric_limits<double>::infinity(), ExtReal(1.0)), DomainError);
  }

  TEST_CASE("sums") {
    const std::vector<ExtReal> a{ExtReal(1.0), ExtReal(2.0), ExtReal(3.0)};
    CHECK(sum_ext(a).value() == 6.0);
    const std::vector<ExtReal> b{ExtReal(1.0), ExtReal::infinity()};
    CHECK(sum_ext(b).is_inf());
    CHECK(sum_ext(std::vector<ExtReal>{}) == ExtReal::zero());
  }

  TEST_CASE("compensated summation recovers cancelled terms") {
    CompensatedSum s;
    s.add(1e16);
    s.add(1.0);
    s.add(-1e16);
    CHECK(s.value() == 1.0);
  }

  TEST_CASE("construction guards") {
    CHECK_THROWS_AS(ExtReal(-1.0), DomainError);
    CHECK_THROWS_AS(ExtReal(std::nan("")), DomainError);
    CHECK_THROWS_AS(ExtReal(std::numeric_limits<double>::infinity()), DomainError);
    CHECK_THROWS_AS(ExtReal(2e300), OverflowError);
    CHECK(ExtReal(1e300).value() == 1e300);
  }

  TEST_CASE("finite products past the guard overflow instead of saturating") {
    CHECK_THROWS_AS(mul_ext(1e200, ExtReal(1e200)), OverflowError);
    CHECK_THROWS_AS(inv_ext(ExtReal(1e-301)), OverflowError);
  }

  TEST_CASE("value of INF is an error") {
    CHECK_THROWS_AS(ExtReal::infinity().value(), NonFiniteIntermediate);
    CHECK(std::isinf(ExtReal::infinity().to_double()));
  }

  TEST_CASE("ordering puts INF above every finite value") {
    CHECK(ExtReal(1e300) < ExtReal::infinity());
    CHECK(ExtReal::zero() < ExtReal(1e-300));
  }

  TEST_CASE("text form uses the literal inf") {
    CHECK(to_string(ExtReal::infinity()) == "inf");
    CHECK(to_string(ExtReal(0.1)) == "0.1");
    CHECK(parse_ext("inf").is_inf());
    CHECK(parse_ext("0.1").value() == 0.1);
    CHECK(parse_ext(to_string(ExtReal(1.0 / 3.0))).value() == 1.0 / 3.0);
    CHECK_THROWS(parse_ext("-1"));
    CHECK_THROWS(parse_ext("abc"));
  }
}
