#include <doctest.h>

#include <cmath>

#include "schrodinger/criteria.hpp"
#include "schrodinger/error.hpp"
#include "schrodinger/gaussian.hpp"
#include "support.hpp"

using namespace schrodinger;
namespace ts = testing_support;

namespace {

ReducedProblem gaussian_1d(double a, double b, double c, std::size_t points = 201) {
  gaussian::GridOptions opt;
  opt.points_per_dim = points;
  return validate_reduction(gaussian::discretize(gaussian::GaussianProblem::scalar(a, b, c), opt));
}

}  // namespace

TEST_SUITE("criteria") {
  TEST_CASE("reciprocal on a constant kernel") {
    const auto pb = validate_reduction(ts::dense_problem({{1, 1}, {1, 1}}, {0.5, 0.5}, {0.5, 0.5}));
    const auto v = check_reciprocal(pb);
    CHECK(v.xy.finite);
    CHECK(v.xy.status == Finiteness::finite);
    CHECK(v.xy.value.value() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(v.yx.value.value() == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("reciprocal against a direct sum") {
    ts::Rng rng(29);
    for (int rep = 0; rep < 20; ++rep) {
      const auto p =
          ts::random_positive(rng, ts::size_in(rng, 1, 7), ts::size_in(rng, 1, 7), 1e-3, 1e3);
      const auto pb = validate_reduction(p);
      const auto v = check_reciprocal(pb);
      const auto lp = ts::to_long(pb.problem().kernel.entries);
      const long double xy = ts::reciprocal_direct(lp, p.mu, p.nu);
      CHECK(std::abs(v.xy.value.value() - static_cast<double>(xy)) <=
            1e-12 * static_cast<double>(xy));
      ts::LMatrix lt(lp.front().size(), std::vector<long double>(lp.size()));
      for (std::size_t i = 0; i < lp.size(); ++i)
        for (std::size_t j = 0; j < lp[i].size(); ++j) lt[j][i] = lp[i][j];
      const long double yx = ts::reciprocal_direct(lt, p.nu, p.mu);
      CHECK(std::abs(v.yx.value.value() - static_cast<double>(yx)) <=
            1e-12 * static_cast<double>(yx));
    }
  }

  TEST_CASE("reciprocal transposition swaps the directions") {
    const auto p = ts::dense_problem({{1, 2, 0.5}, {3, 4, 1}}, {0.3, 0.7}, {0.2, 0.3, 0.5});
    const auto v = check_reciprocal(validate_reduction(p));
    const auto w = check_reciprocal(validate_reduction(transpose(p)));
    CHECK(v.xy.value.value() == doctest::Approx(w.yx.value.value()).epsilon(1e-14));
    CHECK(v.yx.value.value() == doctest::Approx(w.xy.value.value()).epsilon(1e-14));
  }

  TEST_CASE("reciprocal past the overflow guard") {
    const auto pb =
        validate_reduction(ts::dense_problem({{1e-305, 1}, {1e-305, 1}}, {0.5, 0.5}, {0.5, 0.5}));
    const auto v = check_reciprocal(pb);
    CHECK_FALSE(v.xy.finite);
    CHECK(v.xy.status == Finiteness::overflow);
    CHECK(v.xy.value.is_inf());
    CHECK(v.xy.violating_index == std::optional<std::size_t>(0));
    CHECK(v.yx.finite);
  }

  TEST_CASE("reciprocal on gaussian grids") {
    // b - ac/(a+c) > 0 with a = b = c = 1: the xy sum converges.
    const auto good = check_reciprocal(gaussian_1d(1, 1, 1));
    CHECK(good.xy.finite);
    CHECK(good.yx.finite);
    // b = 0.3 < ac/(a+c) = 0.5 and a = 1 < bc/(b+c) fails the other way too.
    const auto bad = check_reciprocal(gaussian_1d(1, 0.3, 1));
    CHECK(bad.xy.status == Finiteness::tail_dominated);
    CHECK(bad.xy.violating_index.has_value());
  }

  TEST_CASE("domination self-domination and a spike") {
    const auto pb =
        validate_reduction(ts::dense_problem({{1, 2, 1}, {1, 1, 5}}, {0.5, 0.5}, {0.3, 0.3, 0.4}));
    const std::vector<std::size_t> k{0, 1};
    const auto self = check_domination(pb, k, k, std::vector<double>{1, 1});
    CHECK(self.holds);
    CHECK(self.log_margin >= 0.0);
    CHECK(self.continuity == Continuity::asserted_not_checked);

    const std::vector<std::size_t> one{0};
    const auto spike = check_domination(pb, k, one, std::vector<double>{2});
    CHECK_FALSE(spike.holds);
    CHECK(spike.violating_y == std::optional<std::size_t>(2));
    CHECK(spike.log_margin < 0.0);
    CHECK(check_domination(pb, k, one, std::vector<double>{5}).holds);

    CHECK_THROWS_AS(check_domination(pb, k, one, std::vector<double>{0}), DomainError);
    CHECK_THROWS_AS(check_domination(pb, k, one, std::vector<double>{1, 1}), DomainError);
    CHECK_THROWS_AS(check_domination(pb, std::vector<std::size_t>{}, one, std::vector<double>{1}),
                    DomainError);
    CHECK_THROWS_AS(check_domination(pb, std::vector<std::size_t>{7}, one, std::vector<double>{1}),
                    DomainError);
  }

  TEST_CASE("domination witness for a gaussian kernel") {
    const auto pb = gaussian_1d(1, 1, 1, 101);
    std::vector<std::size_t> k;
    for (std::size_t i = 0; i < pb.nx(); ++i)
      if (std::abs(pb.problem().x_space.point(i)[0]) <= 1.0) k.push_back(i);
    const auto anchors = domination_anchors(pb, k, 3);
    CHECK(!anchors.empty());
    const auto c = build_domination_coefficients(pb, k, anchors, 3);
    REQUIRE(c.size() == anchors.size());
    for (double v : c) CHECK(v > 0.0);
    const auto v = check_domination(pb, k, anchors, c);
    CHECK(v.holds);
    CHECK(v.continuity == Continuity::declared_by_kernel_kind);
    // Shrinking every coefficient by 1% breaks the witness somewhere.
    std::vector<double> smaller(c);
    for (auto& x : smaller) x *= 0.99;
    CHECK_FALSE(check_domination(pb, k, anchors, smaller).holds);
  }

  TEST_CASE("ratio_moment on a constant kernel") {
    const auto pb = validate_reduction(ts::dense_problem({{1, 1}, {1, 1}}, {0.5, 0.5}, {0.5, 0.5}));
    const std::vector<ExtReal> u(2, ExtReal(1.0));
    const auto v = check_ratio_moment(pb, u);
    CHECK(v.holds);
    CHECK(v.c.value() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(v.argmax.has_value());
  }

  TEST_CASE("ratio_moment against a direct sum") {
    const auto p = ts::two_by_two();
    const auto pb = validate_reduction(p);
    const std::vector<double> u{1.0, 0.5};
    const std::vector<ExtReal> ue{ExtReal(1.0), ExtReal(0.5)};
    for (std::size_t xo : {0u, 1u})
      for (double r : {1.5, 2.0, 3.0}) {
        const auto v = check_ratio_moment(pb, ue, r, xo);
        const long double ref =
            ts::ratio_moment_direct(ts::to_long(p.kernel.entries), p.mu, p.nu, u, r, xo);
        CHECK(v.holds);
        CHECK(v.c.value() == doctest::Approx(static_cast<double>(ref)).epsilon(1e-13));
      }
  }

  TEST_CASE("ratio_moment preconditions and domain") {
    const auto pb = validate_reduction(ts::two_by_two());
    try {
      check_ratio_moment(pb, std::vector<ExtReal>{ExtReal::infinity(), ExtReal(1.0)});
      FAIL("expected PreconditionFailed");
    } catch (const PreconditionFailed& e) {
      CHECK(e.condition() == "psi-finite");
    }
    CHECK_THROWS_AS(check_ratio_moment(pb, std::vector<ExtReal>{ExtReal::zero(), ExtReal(1.0)}),
                    PreconditionFailed);
    CHECK_THROWS_AS(check_ratio_moment(pb, std::vector<ExtReal>(2, ExtReal(1.0)), 1.0),
                    DomainError);
    CHECK_THROWS_AS(check_ratio_moment(pb, std::vector<ExtReal>(2, ExtReal(1.0)), 2.0, 5),
                    DomainError);
    CHECK_THROWS_AS(check_ratio_moment(pb, std::vector<ExtReal>(3, ExtReal(1.0))),
                    DimensionMismatch);
  }

  TEST_CASE("ratio_moment structural infinity from a zero at x_o") {
    const auto pb = validate_reduction(ts::dense_problem({{1, 0}, {1, 1}}, {0.5, 0.5}, {0.5, 0.5}));
    const auto v = check_ratio_moment(pb, std::vector<ExtReal>(2, ExtReal(1.0)), 2.0, 0);
    CHECK_FALSE(v.holds);
    CHECK(v.status == Finiteness::structural_inf);
    CHECK(v.violating_index == std::optional<std::size_t>(1));
  }

  TEST_CASE("ratio_moment on gaussian grids") {
    // Scalar a = b = c = 1 with d = 0: P_r(0) = 3 - 2r.
    const auto pb = gaussian_1d(1, 1, 1);
    const std::vector<ExtReal> u(pb.nx(), ExtReal(1.0));
    CHECK(check_ratio_moment(pb, u, 1.2).holds);
    const auto v = check_ratio_moment(pb, u, 2.0);
    CHECK_FALSE(v.holds);
    CHECK(v.status == Finiteness::tail_dominated);
  }

  TEST_CASE("radial monotone tails") {
    const std::vector<double> grid{0.0, 0.5, 1.0, 1.5, 2.0};
    const auto g = check_radial(RadialProfile::gaussian(1.0), 4.0, 401, grid);
    CHECK(g.holds);
    CHECK(g.l_found == std::optional<double>(0.0));
    CHECK_FALSE(g.violating_sample.has_value());

    const auto bump = check_radial(RadialProfile::custom([](double t) { return std::exp(-(t - 1) * (t - 1)); }),
                                   4.0, 401, grid);
    CHECK(bump.holds);
    CHECK(bump.l_found == std::optional<double>(1.0));

    const auto wave = check_radial(RadialProfile::custom([](double t) { return 2.0 + std::sin(t); }), 20.0, 2001,
                                   std::vector<double>{0, 5, 10});
    CHECK_FALSE(wave.holds);
    CHECK(wave.violating_sample.has_value());
  }

  TEST_CASE("radial sample validation") {
    const std::vector<double> grid{0.0};
    CHECK_THROWS_AS(check_radial(std::vector<double>{0, 1}, std::vector<double>{1}, grid), DimensionMismatch);
    CHECK_THROWS_AS(check_radial(std::vector<double>{1, 0}, std::vector<double>{1, 1}, grid), DomainError);
    CHECK_THROWS_AS(check_radial(std::vector<double>{0, 1}, std::vector<double>{1, 0}, grid), DomainError);
  }

  TEST_CASE("check_all on a gaussian problem") {
    const auto gp = gaussian::GaussianProblem::scalar(1, 1, 1);
    CriteriaOptions opt;
    opt.gaussian = gp;
    const auto rep = check_all(gaussian_1d(1, 1, 1), opt);
    CHECK(rep.positivity);
    CHECK(rep.boundedness);
    REQUIRE(rep.matrix.has_value());
    CHECK(rep.matrix->xy_holds);
    CHECK(rep.existence_certified());
    CHECK(std::find(rep.sufficient.begin(), rep.sufficient.end(), "reciprocal") !=
          rep.sufficient.end());
    CHECK(std::find(rep.sufficient.begin(), rep.sufficient.end(), "gaussian-matrix") !=
          rep.sufficient.end());
    CHECK_FALSE(rep.radial.has_value());
  }

  TEST_CASE("check_all maps indices to the original grid") {
    // x_0 carries no mass and is dropped by the reduction.
    const auto p = ts::dense_problem({{1, 1}, {1e-305, 1}, {1e-305, 1}}, {0.0, 0.5, 0.5}, {0.5, 0.5});
    const auto rep = check_all(validate_reduction(p));
    CHECK(rep.reciprocal.xy.status == Finiteness::overflow);
    CHECK(rep.reciprocal.xy.violating_index == std::optional<std::size_t>(0));
    CHECK(rep.reciprocal.yx.finite);
    // Reduced row 0 of the yx sum is original row 1.
    CriteriaOptions opt;
    opt.domination = DominationWitness{{0, 1}, {0}, {0.5}};
    const auto r2 = check_all(validate_reduction(p), opt);
    REQUIRE(r2.domination.has_value());
    CHECK(r2.domination->witness.k_indices == std::vector<std::size_t>{1, 2});
  }

  TEST_CASE("check_all on a radial kernel") {
    DiscreteProblem p;
    p.x_space = ts::line_space(5);
    p.y_space = ts::line_space(5);
    p.mu = std::vector<double>(5, 0.2);
    p.nu = std::vector<double>(5, 0.2);
    p.kernel = Kernel::radial(RadialProfile::exponential(1.0));
    const auto rep = check_all(validate_reduction(p));
    REQUIRE(rep.radial.has_value());
    CHECK(rep.radial->holds);
    CHECK(std::find(rep.sufficient.begin(), rep.sufficient.end(), "radial") != rep.sufficient.end());
  }
}
