#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hypfol/error.hpp"
#include "hypfol/tensor_core.hpp"
#include "support.hpp"

using namespace hypfol;
using hypfol::test::Gen;

namespace {

/// Exact scalar curvature of (1 + eps sin x2) dx1^2 + dx2^2 + dx3^2, a warped
/// product u^2 dx1^2 + dx2^2 with u^2 = f and R = -f''/f + f'^2/(2 f^2).
double warped_scalar(double eps, double x2) {
  const double f = 1.0 + eps * std::sin(x2);
  return eps * std::sin(x2) / f + eps * eps * std::cos(x2) * std::cos(x2) / (2.0 * f * f);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// gamma_ij = A_ij + B_ij sin(a.x + c) with A SPD and B small, symmetric.
MetricSpec random_metric(Gen& g, int n, int res) {
  const Mat A = g.spd(n, 1.0);
  const Mat B = g.sym(n, 0.15);
  std::vector<std::string> comps(n * n);
  std::string arg = fmt(g.uniform(0.0, 3.0));
  for (int a = 0; a < n; ++a) arg += "+" + std::to_string(g.integer(0, 2)) + "*x" + std::to_string(a + 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) comps[i * n + j] = fmt(A(i, j)) + "+(" + fmt(B(i, j)) + ")*sin(" + arg + ")";
  return MetricSpec::from_components(n, Topology::Periodic, 0.0, 2.0 * std::numbers::pi, res, comps);
}

}  // namespace

TEST_CASE("flat torus has vanishing connection and curvature") {
  const SampledMetric m = materialize(MetricSpec::flat_torus(3, 16));
  for (DerivativeSource src : {DerivativeSource::Auto, DerivativeSource::FiniteDifference}) {
    const CurvatureBundle b = curvature(m, src);
    double z = 0.0;
    for (std::size_t p = 0; p < m.chart().size(); ++p) {
      for (double v : b.christoffel.at(p)) z = std::max(z, std::abs(v));
      for (double v : b.riemann.at(p)) z = std::max(z, std::abs(v));
      z = std::max(z, std::abs(b.scalar[p]));
    }
    CHECK(z == 0.0);
  }
}

TEST_CASE("round sphere connection vanishes at the origin") {
  const SampledMetric m = materialize(MetricSpec::round_sphere(3, 17));
  const ChristoffelField G = christoffel(m);
  const std::size_t centre = m.chart().ravel(std::array<int, 3>{8, 8, 8});
  for (double v : G.at(centre)) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("christoffel symbols of a conformally flat metric") {
  // e^{2f} delta: Gamma^k_ij = delta^k_i f_j + delta^k_j f_i - delta_ij f_k.
  const std::string f = "(0.1*sin(x1)*cos(x2)+0.05*sin(x3))";
  const std::string diag = "exp(2*" + f + ")";
  const MetricSpec s = MetricSpec::from_components(3, Topology::Periodic, 0.0, 2.0 * std::numbers::pi, 64,
                                                   {diag, "0", "0", "0", diag, "0", "0", "0", diag});
  const SampledMetric m = materialize(s);
  const ChristoffelField G = christoffel(m);
  Gen g(3);
  std::vector<double> x(3);
  double err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t p = static_cast<std::size_t>(g.integer(0, static_cast<int>(m.chart().size()) - 1));
    m.chart().coords(p, x);
    const double df[3] = {0.1 * std::cos(x[0]) * std::cos(x[1]), -0.1 * std::sin(x[0]) * std::sin(x[1]),
                          0.05 * std::cos(x[2])};
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          const double want = (k == i) * df[j] + (k == j) * df[i] - (i == j) * df[k];
          err = std::max(err, std::abs(G.get(p, k, i, j) - want));
        }
  }
  CHECK(err < 1e-6);
}

TEST_CASE("round sphere is Einstein with R = n(n-1)") {
  const SampledMetric m = materialize(MetricSpec::round_sphere(3, 64));
  const auto [ric, R] = ricci_and_scalar(m, DerivativeSource::Auto);
  double e_ric = 0.0, e_R = 0.0;
  for_each_valid(m.chart(), ric.validity(), [&](std::size_t p, auto) {
    e_ric = std::max(e_ric, test::max_abs(ric.matrix(p) - 2.0 * m.gamma.matrix(p)));
    e_R = std::max(e_R, std::abs(R[p] - 6.0));
  });
  CHECK(e_ric < 1e-6);
  CHECK(e_R < 1e-6);
}

TEST_CASE("finite-difference Ricci converges at fourth order") {
  auto error = [](int res) {
    const SampledMetric m = materialize(MetricSpec::round_sphere(3, res));
    const auto rs = ricci_and_scalar(m, DerivativeSource::FiniteDifference);
    double e = 0.0;
    for_each_valid(m.chart(), rs.first.validity(), [&](std::size_t p, auto) {
      e = std::max(e, test::max_abs(rs.first.matrix(p) - 2.0 * m.gamma.matrix(p)));
    });
    return e;
  };
  CHECK(std::log2(error(16) / error(32)) > 3.3);
}

TEST_CASE("perturbed torus scalar curvature against the exact warped-product value") {
  const double eps = 0.05;
  const SampledMetric m = materialize(MetricSpec::perturbed_torus(3, 64, eps, {0, 1, 0}));
  std::vector<double> x(3);
  for (DerivativeSource src : {DerivativeSource::Auto, DerivativeSource::FiniteDifference}) {
    const ScalarField R = ricci_and_scalar(m, src).second;
    double e = 0.0, mag = 0.0;
    for (std::size_t p = 0; p < m.chart().size(); ++p) {
      m.chart().coords(p, x);
      e = std::max(e, std::abs(R[p] - warped_scalar(eps, x[1])));
      mag = std::max(mag, std::abs(R[p]));
    }
    CHECK(e < (src == DerivativeSource::Auto ? 1e-12 : 1e-6));
    CHECK(mag < 2.0 * eps);
  }
}

TEST_CASE("mode along x1 leaves the perturbed torus flat") {
  const SampledMetric m = materialize(MetricSpec::perturbed_torus(3, 16, 0.05, {1, 0, 0}));
  CHECK(sup_norm(ricci_and_scalar(m).second) < 1e-14);
}

TEST_CASE("curvature invariants on random metrics") {
  Gen g(21);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = g.integer(2, 4);
    const SampledMetric m = materialize(random_metric(g, n, 8));
    for (DerivativeSource src : {DerivativeSource::Auto, DerivativeSource::FiniteDifference}) {
      const CurvatureInvariants inv = check_invariants(curvature(m, src), m);
      CHECK(inv.antisymmetry < 1e-9);
      CHECK(inv.pair_symmetry < 1e-9);
      CHECK(inv.bianchi < 1e-9);
      CHECK(inv.ricci_trace < 1e-9);
    }
  }
}

TEST_CASE("chart mismatch and singular metrics are rejected") {
  const SampledMetric a = materialize(MetricSpec::flat_torus(3, 8));
  const SampledMetric b = materialize(MetricSpec::flat_torus(3, 12));
  const ChristoffelField G = christoffel(a);
  CHECK_THROWS_AS(riemann(b, G), GeometryError);
  Mat bad = Mat::Identity(2, 2);
  bad(1, 1) = -1.0;
  CHECK_THROWS_AS(inverse_spd(bad, 0), GeometryError);
}

TEST_CASE("laplacian and gradient norm") {
  const SampledMetric m = materialize(MetricSpec::flat_torus(3, 64));
  SUBCASE("constants") {
    const ScalarField c = test::sample_scalar(m.chart(), [](auto) { return 3.0; });
    CHECK(sup_norm(laplacian(m, c)) < 1e-12);
    CHECK(sup_norm(grad_norm_sq(m, c)) < 1e-12);
  }
  SUBCASE("sin x1") {
    const ScalarField f = test::sample_scalar(m.chart(), [](const auto& x) { return std::sin(x[0]); });
    const ScalarField lap = laplacian(m, f);
    const ScalarField minus_f = test::sample_scalar(m.chart(), [](const auto& x) { return -std::sin(x[0]); });
    const double h = m.chart().min_spacing();
    const double err = test::sup_diff(lap, minus_f);
    // Leading truncation term of the five-point second difference is h^4 f^(6) / 90.
    CHECK(err == doctest::Approx(std::pow(h, 4) / 90.0).epsilon(0.01));
    const ScalarField cos2 = test::sample_scalar(m.chart(), [](const auto& x) { return std::cos(x[0]) * std::cos(x[0]); });
    CHECK(test::sup_diff(grad_norm_sq(m, f), cos2) < 1e-5);
  }
  SUBCASE("sin x1 at resolution 128") {
    const SampledMetric fine = materialize(MetricSpec::from_components(
        2, Topology::Periodic, 0.0, 2.0 * std::numbers::pi, 128, {"1", "0", "0", "1"}));
    const ScalarField f = test::sample_scalar(fine.chart(), [](const auto& x) { return std::sin(x[0]); });
    const ScalarField minus_f = test::sample_scalar(fine.chart(), [](const auto& x) { return -std::sin(x[0]); });
    CHECK(test::sup_diff(laplacian(fine, f), minus_f) < 1e-6);
  }
}

TEST_CASE("laplacian on the round sphere matches the closed form") {
  // For g = u^2 delta in 3D, Delta f = u^-2 (f_kk + u_k f_k / u).
  const SampledMetric m = materialize(MetricSpec::round_sphere(3, 48, 1.0));
  const ScalarField f = test::sample_scalar(m.chart(), [](const auto& x) { return x[0] * x[0] + x[1]; });
  const ScalarField lap = laplacian(m, f);
  std::vector<double> x(3);
  double e = 0.0;
  for_each_valid(m.chart(), lap.validity(), [&](std::size_t p, auto) {
    m.chart().coords(p, x);
    const double q = 1.0 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    const double u = 2.0 / q;
    const double du[3] = {-4.0 * x[0] / (q * q), -4.0 * x[1] / (q * q), -4.0 * x[2] / (q * q)};
    const double df[3] = {2.0 * x[0], 1.0, 0.0};
    const double want = (2.0 + (du[0] * df[0] + du[1] * df[1] + du[2] * df[2]) / u) / (u * u);
    e = std::max(e, std::abs(lap[p] - want));
  });
  CHECK(e < 1e-9);
}
