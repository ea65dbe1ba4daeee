#pragma once

#include <span>
#include <vector>

#include "hypfol/conformal.hpp"

namespace hypfol {

/// sigma_0 .. sigma_n of lambda: coefficients of prod_i (x + lambda_i).
std::vector<double> elementary_symmetric(std::span<const double> lambda);

/// sigma_k(lambda), 1 <= k <= n. Throws DomainError for k out of range.
double sigma(std::span<const double> lambda, int k);

/// Garding cone membership: sigma_1 > 0, ..., sigma_k > 0.
bool in_gamma_k(std::span<const double> lambda, int k);

/// Per point |R - (4(n-1)/r^2)(n - sum_i rho_i)|.
ScalarField scalar_correspondence_residual(const VecField& radii, const ScalarField& R, double r);

/// sup over points of |(1/n) sum_i rho_i - (1 - r^2 S / (4n(n-1)))|.
/// Throws GeometryError when R deviates from S by more than 10 * `tol`.
double mean_radii_check(const VecField& radii, const ScalarField& R, double S, double r, double tol = 1e-4);

struct FoliationFunctional {
  int k = 0;
  double r = 0.0;
  /// F_k = sigma_k((1 + kappa_i) / (1 - kappa_i)).
  ScalarField F;
  /// | |F_k| - (r^2/2)^k |.
  ScalarField abs_residual;
  /// sign(F_k) as -1, 0 or +1.
  ScalarField sign;
};

FoliationFunctional foliation_functional(const VecField& kappa, int k, double r);

struct SigmaNormalization {
  double sigma_k = 0.0;
  /// c^2 = sigma_k^{1/k}; the rescaled metric c^2 gamma has sigma_k = 1.
  double c2 = 1.0;
  double c = 1.0;
};

/// Throws GeometryError unless every lambda is in Gamma_k and sigma_k is
/// constant over the chart to 1e-8.
SigmaNormalization normalize_sigma_k(const SpectralField& spectral, int k);

}  // namespace hypfol
