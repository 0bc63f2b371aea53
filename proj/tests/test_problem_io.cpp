#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "schrodinger/error.hpp"
#include "schrodinger/problem_io.hpp"
#include "support.hpp"

using namespace schrodinger;
namespace fs = std::filesystem;
namespace ts = testing_support;

namespace {

fs::path fixture(const char* name) { return fs::path(FIXTURE_DIR) / name; }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("schrodinger_io_" + name);
  fs::remove_all(p);
  return p;
}

void require_same(const DiscreteProblem& a, const DiscreteProblem& b) {
  CHECK(a.x_space == b.x_space);
  CHECK(a.y_space == b.y_space);
  CHECK(a.mu == b.mu);
  CHECK(a.nu == b.nu);
  CHECK(a.kernel.kind == b.kernel.kind);
  CHECK(a.kernel.entries == b.kernel.entries);
  CHECK(a.kernel.precision == b.kernel.precision);
  CHECK(a.kernel.profile.shape == b.kernel.profile.shape);
  CHECK(a.kernel.profile.scale == b.kernel.profile.scale);
  CHECK(a.kernel.profile.t == b.kernel.profile.t);
  CHECK(a.kernel.profile.theta == b.kernel.profile.theta);
  CHECK(a.kernel.cutoff == b.kernel.cutoff);
}

DiscreteProblem expected_two_by_two() {
  auto p = ts::two_by_two();
  p.x_space.weights = {0.5, 0.5};
  p.y_space.weights = {0.5, 0.5};
  return p;
}

}  // namespace

TEST_SUITE("problem_io") {
  TEST_CASE("well-formed json fixture") {
    const auto p = load_problem(fixture("two_by_two.json"));
    require_same(p, expected_two_by_two());
  }

  TEST_CASE("scalar points are accepted for one-dimensional spaces") {
    const auto p = load_problem(fixture("constant.json"));
    CHECK(p.x_space.dim == 1);
    CHECK(p.x_space.point(1)[0] == 1.0);
  }

  TEST_CASE("negative weight is a schema error") {
    CHECK_THROWS_AS(load_problem(fixture("negative_weight.json")), SchemaError);
  }

  TEST_CASE("missing field names the field") {
    try {
      load_problem(fixture("missing_field.json"));
      FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
      CHECK(std::string(e.what()).find("/nu") != std::string::npos);
    }
  }

  TEST_CASE("syntax errors carry the line") {
    try {
      load_problem(fixture("malformed.json"));
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }

  TEST_CASE("csv bundle of the 2x2 problem matches the in-memory constructor") {
    const auto p = load_problem(fixture("two_by_two_csv"));
    require_same(p, expected_two_by_two());
  }

  TEST_CASE("csv cells that are not numbers report line and column") {
    const fs::path dir = scratch("badcsv");
    save_problem(ts::two_by_two(), dir, ProblemFormat::csv_bundle);
    std::ofstream(dir / "kernel.csv") << "1,2\n3,x\n";
    try {
      load_problem(dir);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(e.field() == "column 2");
    }
    fs::remove_all(dir);
  }

  TEST_CASE("inf is rejected in problem inputs") {
    const fs::path dir = scratch("infcsv");
    save_problem(ts::two_by_two(), dir, ProblemFormat::csv_bundle);
    std::ofstream(dir / "kernel.csv") << "1,inf\n3,4\n";
    CHECK_THROWS_AS(load_problem(dir), ParseError);
    fs::remove_all(dir);
  }

  TEST_CASE("json round trip is bit exact") {
    ts::Rng rng(5);
    auto p = ts::random_positive(rng, 7, 5);
    for (auto& c : p.x_space.coords) c = ts::uniform(rng, -1, 1);
    const fs::path f = scratch("rt.json");
    save_problem(p, f, ProblemFormat::json);
    require_same(load_problem(f), p);
    fs::remove(f);
  }

  TEST_CASE("csv round trip") {
    ts::Rng rng(6);
    auto p = ts::random_positive(rng, 4, 6);
    const fs::path dir = scratch("rtcsv");
    save_problem(p, dir, ProblemFormat::csv_bundle);
    const auto q = load_problem(dir);
    for (std::size_t i = 0; i < p.mu.size(); ++i) CHECK(std::abs(q.mu[i] - p.mu[i]) <= 1e-15);
    require_same(q, p);
    fs::remove_all(dir);
  }

  TEST_CASE("non-dense kernels round trip through both formats") {
    auto p = load_problem(fixture("radial_exponential.json"));
    p.kernel = Kernel::radial(RadialProfile::table({0, 1, 2}, {3, 2, 1}), 1.5);
    const fs::path f = scratch("radial.json");
    save_problem(p, f, ProblemFormat::json);
    require_same(load_problem(f), p);
    const fs::path dir = scratch("radialcsv");
    save_problem(p, dir, ProblemFormat::csv_bundle);
    require_same(load_problem(dir), p);
    fs::remove(f);
    fs::remove_all(dir);
  }

  TEST_CASE("gaussian problems accept scalar and diagonal shorthand") {
    const auto g1 = gaussian_from_json(read_json_file(fixture("gaussian_1d.json")));
    CHECK(g1.dim() == 1);
    const auto g2 = gaussian_from_json(read_json_file(fixture("gaussian_diag_counterexample.json")));
    CHECK(g2.dim() == 2);
    CHECK(g2.a(1, 1) == 10.0);
    CHECK(g2.a(0, 1) == 0.0);
    const auto back = gaussian_from_json(gaussian_to_json(g2));
    CHECK(back.b == g2.b);
    CHECK_THROWS_AS(gaussian_from_json(parse_json(R"({"a": -1, "b": 1, "c": 1})", "inline")), NotSPD);
  }
}
