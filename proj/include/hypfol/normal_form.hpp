#pragma once

#include "hypfol/conformal.hpp"

namespace hypfol {

/// Exact hyperbolic normal form g = r^-2 (dr^2 + g_r) with
/// g_r = gamma - r^2 P + (r^4 / 4) Q, Q = P gamma^-1 P.
struct FGExpansion {
  SymTensorField gamma;
  SymTensorField P;
  SymTensorField Q;

  const Chart& chart() const { return gamma.chart(); }
  const Validity& validity() const { return P.validity(); }
  int n() const { return gamma.n(); }

  Mat g_r(std::size_t p, double r) const;
  /// d/dr g_r = -2 r P + r^3 Q.
  Mat g_r_prime(std::size_t p, double r) const;

  /// sqrt(2 / lambda_max) at p (infinity when lambda_max <= 0).
  double r_max(std::size_t p) const;
  /// Infimum of r_max over valid points.
  double r_max() const;
};

FGExpansion build_expansion(const SymTensorField& gamma, const SymTensorField& P);

/// g_r sampled on the chart; validity is that of P.
SymTensorField slice_metric(const FGExpansion& e, double r);

/// Fundamental forms of the level set {r = const}:
///   I   = r^-2 gamma - P + (r^2/4) Q
///   II  = -r^-2 gamma + (r^2/4) Q
///   III = r^-2 gamma + P + (r^2/4) Q
struct LevelSetGeometry {
  double r = 0.0;
  SymTensorField I;
  SymTensorField II;
  SymTensorField III;
};

/// Throws GeometryError unless 0 < r < r_max().
LevelSetGeometry fundamental_forms(const FGExpansion& e, double r);

/// Principal curvatures (ascending) and the shape operator I^-1 II, stored
/// column-major per point.
struct Weingarten {
  VecField kappa;
  Field shape;

  Mat shape_operator(std::size_t p) const;
};

/// Generalized eigenproblem II v = kappa I v at every valid point.
Weingarten weingarten(const LevelSetGeometry& geom);

/// kappa = -(1 + (r^2/2) lambda) / (1 - (r^2/2) lambda).
double kappa_closed_form(double r, double lambda);

/// rho_i = 2 / (1 - kappa_i); throws GeometryError where kappa_i >= 1.
VecField curvature_radii(const VecField& kappa);

/// |1 - (r^2/2) lambda_i - 2/(1 - kappa)| with kappa from `kappa` (ascending)
/// matched to lambda (ascending) through the order-reversing pairing.
/// Component i refers to lambda_i.
VecField key_identity_residual(double r, const SpectralField& spectral, const VecField& kappa);

/// Same residual with kappa from kappa_closed_form.
VecField key_identity_closed_form_residual(double r, const SpectralField& spectral);

struct HorosphericalMetric {
  SymTensorField h;
  /// sup over points and components of |h - 4 r^-2 gamma|.
  double residual = 0.0;
};

/// h = I - 2 II + III.
HorosphericalMetric horospherical_metric(const FGExpansion& e, const LevelSetGeometry& geom);

struct BulkOptions {
  int slices = 5;
  /// Radial spacing; 0 selects r0 / max(20, N), N the largest boundary
  /// resolution.
  double delta = 0.0;
};

struct BulkResidual {
  /// Per boundary point: sup over frame components of Riem + g wedge g in a
  /// g-orthonormal frame at r = r0.
  ScalarField field;
  double sup = 0.0;
  double delta = 0.0;
};

/// Curvature of the (n+1)-dimensional bulk metric r^-2 (dr^2 + g_r),
/// sampled on boundary grid x radial window around r0 and differentiated
/// with 4th-order finite differences in every direction.
BulkResidual bulk_curvature_residual(const FGExpansion& e, double r0, const BulkOptions& opt = {});

/// Per point: max over (i,j,k,l) of
///   | r R^{g_r}_ijkl - 1/2 (g_il g'_jk + g'_il g_jk - g'_ik g_jl - g_ik g'_jl)
///     + (r/4)(g'_il g'_jk - g'_ik g'_jl) |
/// with g' = d/dr g_r exact and R^{g_r} by finite differences.
ScalarField tangential_decomposition_residual(const FGExpansion& e, double r);

/// Coefficient identities after r^2 = -2 rho, g_rho = gamma + 2 rho P + rho^2 Q.
struct AmbientResidual {
  double first = 0.0;   // |g'(0) - 2P|
  double second = 0.0;  // |g''(0) - 2Q|
  double third = 0.0;   // |g'''|
};

AmbientResidual ambient_expansion_check(const FGExpansion& e);

}  // namespace hypfol
