#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hypfol/error.hpp"
#include "hypfol/expression.hpp"
#include "hypfol/finite_difference.hpp"
#include "hypfol/metric_spec.hpp"
#include "support.hpp"

using namespace hypfol;
using hypfol::test::Gen;

namespace {

/// Random expression text over x1..xn built from the full grammar.
std::string random_expr(Gen& g, int n, int depth) {
  if (depth == 0 || g.integer(0, 4) == 0) {
    if (g.integer(0, 1) == 0) return "x" + std::to_string(g.integer(1, n));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", g.uniform(0.1, 3.0));
    return buf;
  }
  static const char* funcs[] = {"sin", "cos", "tanh", "exp(-1+0*x1)*sin", "sqrt(1.5+sin", "cosh(0.5*tanh"};
  switch (g.integer(0, 6)) {
    case 0: return "(" + random_expr(g, n, depth - 1) + "+" + random_expr(g, n, depth - 1) + ")";
    case 1: return "(" + random_expr(g, n, depth - 1) + "-" + random_expr(g, n, depth - 1) + ")";
    case 2: return random_expr(g, n, depth - 1) + "*" + random_expr(g, n, depth - 1);
    case 3: return random_expr(g, n, depth - 1) + "/(2+" + "sin(" + random_expr(g, n, depth - 1) + "))";
    case 4: return "-" + random_expr(g, n, depth - 1);
    case 5: return "(" + random_expr(g, n, depth - 1) + ")^2";
    default: {
      const int f = g.integer(0, 5);
      return std::string(funcs[f]) + "(" + random_expr(g, n, depth - 1) + (f >= 4 ? "))" : ")");
    }
  }
}

}  // namespace

TEST_CASE("expression examples") {
  const double zero[2] = {0.0, 0.0};
  CHECK(parse_expression("4/(1+x1^2+x2^2)^2", 2).evaluate(zero) == 4.0);
  const double pt[2] = {std::numbers::pi / 2, 0.0};
  CHECK(parse_expression("sin(x1)*cos(x2)", 2).evaluate(pt) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("expression precedence and associativity") {
  const double x[1] = {0.0};
  CHECK(parse_expression("2^3^2", 1).evaluate(x) == 512.0);
  CHECK(parse_expression("-2^2", 1).evaluate(x) == -4.0);
  CHECK(parse_expression("8/4/2", 1).evaluate(x) == 1.0);
  CHECK(parse_expression("1-2-3", 1).evaluate(x) == -4.0);
  CHECK(parse_expression("2*3+4*5", 1).evaluate(x) == 26.0);
}

TEST_CASE("expression errors") {
  try {
    parse_expression("1+*2", 1);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 2);
  }
  CHECK_THROWS_AS(parse_expression("foo(x1)", 1), ParseError);
  CHECK_THROWS_AS(parse_expression("x3", 2), ParseError);
  CHECK_THROWS_AS(parse_expression("x0", 2), ParseError);
  CHECK_THROWS_AS(parse_expression("2x1", 2), ParseError);
  CHECK_THROWS_AS(parse_expression("", 2), ParseError);
  CHECK_THROWS_AS(parse_expression(std::string(300, '(') + "1" + std::string(300, ')'), 1), ParseError);
  const double x[1] = {-1.0};
  CHECK_THROWS_AS(parse_expression("sqrt(x1)", 1).evaluate(x), DomainError);
}

TEST_CASE("expression round trip through to_string") {
  Gen g(7);
  for (int trial = 0; trial < 40; ++trial) {
    const std::string text = random_expr(g, 3, 4);
    const Expression a = parse_expression(text, 3);
    const Expression b = parse_expression(a.to_string(), 3);
    for (int k = 0; k < 100; ++k) {
      const auto x = g.vec(3, -1.0, 1.0);
      const double va = a.evaluate(x);
      const double vb = b.evaluate(x);
      INFO(text);
      CHECK(std::abs(va - vb) < 1e-14 * std::max(1.0, std::abs(va)));
    }
  }
}

TEST_CASE("chart spacing and topology") {
  const Chart per = Chart::uniform(2, Topology::Periodic, 0.0, 1.0, 8);
  CHECK(per.axis(0).spacing() == doctest::Approx(1.0 / 8));
  const Chart open = Chart::uniform(2, Topology::Open, 0.0, 1.0, 8);
  CHECK(open.axis(0).spacing() == doctest::Approx(1.0 / 7));
  CHECK(per.size() == 64);
  int idx[2] = {7, 3};
  const std::size_t p = per.ravel(idx);
  CHECK(per.shifted(p, 0, 7, 1) == per.ravel(std::array<int, 2>{0, 3}));
}

TEST_CASE("builtin metrics") {
  SUBCASE("flat torus is the identity") {
    const SampledMetric m = materialize(MetricSpec::flat_torus(3, 16));
    for (std::size_t p = 0; p < m.chart().size(); ++p) CHECK(test::max_abs(m.gamma.matrix(p) - Mat::Identity(3, 3)) == 0.0);
  }
  SUBCASE("round sphere is 4 delta at the origin") {
    const SampledMetric m = materialize(MetricSpec::round_sphere(3, 17));
    const std::size_t centre = m.chart().ravel(std::array<int, 3>{8, 8, 8});
    CHECK(test::max_abs(m.gamma.matrix(centre) - 4.0 * Mat::Identity(3, 3)) < 1e-15);
  }
  SUBCASE("perturbed torus formula") {
    const SampledMetric m = materialize(MetricSpec::perturbed_torus(3, 16, 0.05, {1, 0, 0}));
    std::vector<double> x(3);
    for (std::size_t p = 0; p < m.chart().size(); ++p) {
      m.chart().coords(p, x);
      const Mat g = m.gamma.matrix(p);
      CHECK(g(0, 0) == doctest::Approx(1.0 + 0.05 * std::sin(x[0])).epsilon(1e-15));
      CHECK(g(0, 1) == 0.0);
      CHECK(g(1, 2) == 0.0);
      CHECK(g(1, 1) == 1.0);
    }
  }
}

TEST_CASE("spec json validation") {
  using nlohmann::json;
  const json good = {{"chart", {{"n", 2}, {"topology", "periodic"}, {"extent", {0.0, 6.283185307179586}}, {"resolution", 16}}},
                     {"metric", {{"components", {"1+0.1*sin(x1)", "0", "0", "1"}}}}};
  CHECK_NOTHROW(MetricSpec::from_json(good));

  json asym = good;
  asym["metric"]["components"] = {"1", "x1", "0", "1"};
  CHECK_THROWS_AS(materialize(MetricSpec::from_json(asym)), SpecError);

  json indefinite = good;
  indefinite["metric"]["components"] = {"-1", "0", "0", "1"};
  CHECK_THROWS_AS(materialize(MetricSpec::from_json(indefinite)), GeometryError);

  json coarse = good;
  coarse["chart"]["resolution"] = 4;
  CHECK_THROWS_AS(MetricSpec::from_json(coarse), SpecError);

  json domain = good;
  domain["metric"]["components"] = {"sqrt(sin(x1)-0.5)", "0", "0", "1"};
  CHECK_THROWS_AS(materialize(MetricSpec::from_json(domain)), DomainError);

  json missing = good;
  missing.erase("metric");
  CHECK_THROWS_AS(MetricSpec::from_json(missing), SpecError);
}

TEST_CASE("materialized metrics are symmetric positive definite") {
  Gen g(11);
  for (int trial = 0; trial < 10; ++trial) {
    const double eps = g.uniform(0.0, 0.9);
    const MetricSpec s = MetricSpec::perturbed_torus(3, 8, eps, {g.integer(0, 2), g.integer(0, 2), g.integer(1, 2)});
    const SampledMetric m = materialize(s);
    for (std::size_t p = 0; p < m.chart().size(); ++p) {
      const Mat a = m.gamma.matrix(p);
      CHECK(test::max_abs(a - a.transpose()) == 0.0);
      CHECK(Eigen::SelfAdjointEigenSolver<Mat>(a).eigenvalues().minCoeff() > 0.0);
    }
  }
}

TEST_CASE("analytic derivatives agree with finite differences at fourth order") {
  auto error = [](int res) {
    const SampledMetric m = materialize(MetricSpec::perturbed_torus(3, res, 0.3, {1, 1, 0}));
    REQUIRE(m.d1);
    REQUIRE(m.d2);
    const int S = sym_size(3);
    std::vector<double> d1(3 * S), d2(S * S);
    std::vector<int> idx(3);
    double e = 0.0;
    for (std::size_t p = 0; p < m.chart().size(); ++p) {
      m.chart().unravel(p, idx);
      fd::derivatives(m.gamma, p, idx, d1.data(), d2.data());
      for (int c = 0; c < 3 * S; ++c) e = std::max(e, std::abs(d1[c] - m.d1->at(p)[c]));
      for (int c = 0; c < S * S; ++c) e = std::max(e, std::abs(d2[c] - m.d2->at(p)[c]));
    }
    return e;
  };
  const double coarse = error(16);
  const double fine = error(32);
  CHECK(std::log2(coarse / fine) > 3.7);
}

TEST_CASE("scaled metric") {
  const SampledMetric m = materialize(MetricSpec::round_sphere(3, 12));
  const SampledMetric s = scaled(m, 2.5);
  for (std::size_t p = 0; p < m.chart().size(); ++p) {
    CHECK(test::max_abs(s.gamma.matrix(p) - 2.5 * m.gamma.matrix(p)) < 1e-14);
  }
}
