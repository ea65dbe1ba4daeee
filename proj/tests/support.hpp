#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "hypfol/conformal.hpp"
#include "hypfol/metric_spec.hpp"

namespace hypfol::test {

/// Small hand-rolled generators over a seeded engine.
class Gen {
 public:
  explicit Gen(std::uint64_t seed = 42) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  std::vector<double> vec(int n, double lo, double hi) {
    std::vector<double> v(n);
    for (double& x : v) x = uniform(lo, hi);
    return v;
  }

  /// Random SPD matrix A A^T + shift I.
  Mat spd(int n, double shift = 0.5) {
    Mat a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = uniform(-1.0, 1.0);
    return a * a.transpose() + shift * Mat::Identity(n, n);
  }

  Mat sym(int n, double scale = 1.0) {
    Mat a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = uniform(-scale, scale);
    return 0.5 * (a + a.transpose());
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

/// Constant tensor field on a small periodic chart.
inline SymTensorField constant_field(const Chart& chart, const Mat& m) {
  SymTensorField f(chart);
  for (std::size_t p = 0; p < chart.size(); ++p) f.set_symmetrized(p, m);
  return f;
}

inline Chart tiny_chart(int n, int res = 8) {
  return Chart::uniform(n, Topology::Periodic, 0.0, 2.0 * std::numbers::pi, res);
}

template <class F>
ScalarField sample_scalar(const Chart& chart, F&& f) {
  ScalarField s(chart);
  std::vector<double> x(chart.dim());
  for (std::size_t p = 0; p < chart.size(); ++p) {
    chart.coords(p, x);
    s[p] = f(x);
  }
  return s;
}

/// Max over valid points of |a - b|.
inline double sup_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for_each_valid(a.chart(), a.validity(), [&](std::size_t p, auto) { m = std::max(m, std::abs(a[p] - b[p])); });
  return m;
}

}  // namespace hypfol::test
