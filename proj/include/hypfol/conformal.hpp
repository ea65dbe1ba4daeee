#pragma once

#include <string>
#include <vector>

#include "hypfol/tensor_core.hpp"

namespace hypfol {

/// Eigenvalues of P relative to g at one point: P v_i = lambda_i g v_i,
/// lambda ascending, columns of `vectors` g-orthonormal.
struct RelativeEigen {
  Vec lambda;
  Mat vectors;
};

/// Generalized symmetric eigenproblem by Cholesky reduction. Throws
/// GeometryError when g is not positive definite.
RelativeEigen eigen_rel(const Mat& g, const Mat& P);

/// Per-point relative eigen-decomposition of a symmetric tensor field.
class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(const Chart& chart, int n, Validity v);

  const Chart& chart() const { return chart_; }
  const Validity& validity() const { return valid_; }
  int n() const { return n_; }

  double lambda(std::size_t p, int i) const { return lambda_[p * n_ + i]; }
  Vec eigenvalues(std::size_t p) const;
  Mat eigenvectors(std::size_t p) const;
  void set(std::size_t p, const RelativeEigen& e);

 private:
  Chart chart_;
  Validity valid_;
  int n_ = 0;
  std::vector<double> lambda_;
  std::vector<double> vectors_;
};

SpectralField eigen_rel(const SymTensorField& gamma, const SymTensorField& P);

/// P = (Ric - R / (2(n-1)) g) / (n - 2). Requires n >= 3.
SymTensorField schouten(const SymTensorField& gamma, const SymTensorField& ric, const ScalarField& R);
SymTensorField schouten(const SampledMetric& m, const CurvatureBundle& b);

/// Q_ij = g^kl P_ik P_jl.
Mat q_tensor(const Mat& g, const Mat& P);
SymTensorField q_tensor(const SymTensorField& gamma, const SymTensorField& P);

/// Residuals of the two-dimensional constraints g^ij P_ij = R/2 and
/// g^jk P_ij,k = R_,i (sup over valid points; the divergence residual is
/// measured in the g-norm of the covector).
struct P2Residual {
  double trace = 0.0;
  double divergence = 0.0;
};

P2Residual check_p2(const SampledMetric& m, const SymTensorField& P, const CurvatureBundle& b);

/// Scalar curvature of e^{2 phi} g:
/// e^{-2 phi} (R - 2(n-1) Delta phi - (n-1)(n-2) |grad phi|^2).
ScalarField conformal_scalar(const SampledMetric& m, const CurvatureBundle& b, const ScalarField& phi);
ScalarField conformal_scalar(const SampledMetric& m, const ChristoffelField& gamma, const ScalarField& R,
                             const ScalarField& phi);

/// e^{2 phi} g sampled on the same chart (no analytic derivatives).
SampledMetric conformal_metric(const SampledMetric& m, const ScalarField& phi);

struct YamabeConfig {
  int max_steps = 5000;
  /// dt = dt_factor * h^2 / (n (n - 1)), h the smallest grid spacing.
  double dt_factor = 0.1;
  double tol = 1e-4;
  /// Steps exempt from the monotone-decay requirement.
  int transient = 50;
  /// Abort when the residual exceeds this multiple of its running minimum.
  double growth_limit = 10.0;
};

struct YamabeReport {
  bool converged = false;
  bool aborted = false;
  int steps = 0;
  double dt = 0.0;
  double mean_R = 0.0;
  double residual = 0.0;
  double max_volume_drift = 0.0;
  std::vector<double> residual_history;
  std::vector<double> mean_history;
  std::string diagnostic;

  /// True when the residual never increases after `transient` steps.
  bool monotone_after(int transient) const;
};

struct YamabeResult {
  ScalarField phi;
  YamabeReport report;
};

/// Normalized flow d phi / dt = Rbar - R~, Rbar the volume-weighted mean of
/// R~ for e^{2 phi} g, run by explicit Euler until
/// sup|R~ - Rbar| / max(1, |Rbar|) < tol or max_steps.
YamabeResult yamabe_flow(const SampledMetric& m, const CurvatureBundle& b, const YamabeConfig& cfg = {});
YamabeResult yamabe_flow(const SampledMetric& m, const ChristoffelField& gamma, const ScalarField& R,
                         const YamabeConfig& cfg = {});

}  // namespace hypfol
