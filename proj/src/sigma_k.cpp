#include "hypfol/sigma_k.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "hypfol/error.hpp"

namespace hypfol {

std::vector<double> elementary_symmetric(std::span<const double> lambda) {
  const std::size_t n = lambda.size();
  std::vector<double> e(n + 1, 0.0);
  e[0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j >= 1; --j) e[j] += lambda[i] * e[j - 1];
  }
  return e;
}

double sigma(std::span<const double> lambda, int k) {
  const int n = static_cast<int>(lambda.size());
  if (k < 1 || k > n) {
    throw DomainError("sigma: k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  return elementary_symmetric(lambda)[k];
}

bool in_gamma_k(std::span<const double> lambda, int k) {
  const int n = static_cast<int>(lambda.size());
  if (k < 1 || k > n) {
    throw DomainError("in_gamma_k: k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  const std::vector<double> e = elementary_symmetric(lambda);
  for (int j = 1; j <= k; ++j) {
    if (!(e[j] > 0.0)) return false;
  }
  return true;
}

ScalarField scalar_correspondence_residual(const VecField& radii, const ScalarField& R, double r) {
  require_same_chart(radii.chart(), R.chart(), "scalar_correspondence_residual");
  const int n = radii.ncomp();
  const Validity v = radii.validity().merged(R.validity());
  ScalarField out(R.chart(), v);
  const double c = 4.0 * (n - 1) / (r * r);
  for_each_valid(R.chart(), v, [&](std::size_t p, auto) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += radii.get(p, i);
    out[p] = std::abs(R[p] - c * (n - s));
  });
  return out;
}

double mean_radii_check(const VecField& radii, const ScalarField& R, double S, double r, double tol) {
  require_same_chart(radii.chart(), R.chart(), "mean_radii_check");
  const int n = radii.ncomp();
  const Validity v = radii.validity().merged(R.validity());
  const double target = 1.0 - r * r * S / (4.0 * n * (n - 1));
  double worst = 0.0;
  double spread = 0.0;
  for_each_valid(R.chart(), v, [&](std::size_t p, auto) {
    spread = std::max(spread, std::abs(R[p] - S));
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += radii.get(p, i);
    worst = std::max(worst, std::abs(s / n - target));
  });
  if (spread > 10.0 * tol) {
    throw GeometryError("mean_radii_check: scalar curvature deviates from S by " + std::to_string(spread) +
                        "; input is not a constant scalar curvature metric");
  }
  return worst;
}

FoliationFunctional foliation_functional(const VecField& kappa, int k, double r) {
  const Chart& chart = kappa.chart();
  const int n = kappa.ncomp();
  if (k < 1 || k > n) throw DomainError("foliation_functional: k out of range");
  const Validity& v = kappa.validity();
  FoliationFunctional out{k, r, ScalarField(chart, v), ScalarField(chart, v), ScalarField(chart, v)};
  const double target = std::pow(0.5 * r * r, k);
  std::vector<double> t(n);
  for_each_valid(chart, v, [&](std::size_t p, auto) {
    for (int i = 0; i < n; ++i) {
      const double kap = kappa.get(p, i);
      if (std::abs(1.0 - kap) < 1e-12) {
        throw GeometryError("foliation_functional: kappa = 1 at point " + std::to_string(p));
      }
      t[i] = (1.0 + kap) / (1.0 - kap);
    }
    const double F = elementary_symmetric(t)[k];
    out.F[p] = F;
    out.abs_residual[p] = std::abs(std::abs(F) - target);
    out.sign[p] = F > 0.0 ? 1.0 : (F < 0.0 ? -1.0 : 0.0);
  });
  return out;
}

SigmaNormalization normalize_sigma_k(const SpectralField& spectral, int k) {
  const int n = spectral.n();
  if (k < 1 || k > n) throw DomainError("normalize_sigma_k: k out of range");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  std::vector<double> lam(n);
  for_each_valid(spectral.chart(), spectral.validity(), [&](std::size_t p, auto) {
    for (int i = 0; i < n; ++i) lam[i] = spectral.lambda(p, i);
    if (!in_gamma_k(lam, k)) {
      throw GeometryError("normalize_sigma_k: eigenvalues outside Gamma_" + std::to_string(k) + " at point " +
                          std::to_string(p));
    }
    const double s = sigma(lam, k);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  });
  if (!(hi >= lo)) throw GeometryError("normalize_sigma_k: no valid points");
  if (hi - lo > 1e-8 * std::max(1.0, std::abs(hi))) {
    throw GeometryError("normalize_sigma_k: sigma_k varies over the chart (spread " + std::to_string(hi - lo) +
                        "); only homogeneous inputs are supported");
  }
  SigmaNormalization out;
  out.sigma_k = 0.5 * (lo + hi);
  out.c2 = std::pow(out.sigma_k, 1.0 / k);
  out.c = std::sqrt(out.c2);
  return out;
}

}  // namespace hypfol
