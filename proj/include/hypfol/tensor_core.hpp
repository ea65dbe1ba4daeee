#pragma once

#include <array>

#include "hypfol/field.hpp"
#include "hypfol/metric_spec.hpp"

namespace hypfol {

/// Where metric derivatives come from. `Auto` uses analytic derivative
/// samples when the metric carries them and 4th-order finite differences
/// otherwise.
enum class DerivativeSource { Auto, FiniteDifference };

inline constexpr int kMaxSym = sym_size(kMaxDim);
inline constexpr int kMaxPairs = kMaxDim * (kMaxDim - 1) / 2;

/// Metric with first and second coordinate derivatives at one point.
/// dg[k][s(i,j)] = d_k g_ij, ddg[s(k,l)][s(i,j)] = d_k d_l g_ij.
struct MetricJet {
  int n = 0;
  Mat g;
  double dg[kMaxDim][kMaxSym];
  double ddg[kMaxSym][kMaxSym];

  double d(int k, int i, int j) const { return dg[k][sym_index(i, j, n)]; }
  double dd(int k, int l, int i, int j) const { return ddg[sym_index(k, l, n)][sym_index(i, j, n)]; }
};

/// Index of the antisymmetric pair (i, j), i != j, among the n(n-1)/2
/// pairs; `sign` is -1 when i > j.
struct PairTable {
  explicit PairTable(int n);
  int n;
  int count;
  int index[kMaxDim][kMaxDim];
  int sign[kMaxDim][kMaxDim];
};

using PairMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxPairs, kMaxPairs>;

/// Curvature of a metric at one point. Riemann is lowered and stored as
/// the pair matrix R[(ij)][(kl)] with i < j, k < l, convention
/// R_ijkl = K (g_ik g_jl - g_il g_jk) for constant sectional curvature K.
struct PointCurvature {
  int n = 0;
  Mat ginv;
  double christoffel[kMaxDim][kMaxDim][kMaxDim];  // Gamma^k_ij as [k][i][j]
  PairMat riemann;
  Mat ricci;
  double scalar = 0.0;

  double R(const PairTable& t, int i, int j, int k, int l) const {
    if (i == j || k == l) return 0.0;
    return t.sign[i][j] * t.sign[k][l] * riemann(t.index[i][j], t.index[k][l]);
  }
};

/// Inverts g by Cholesky; throws GeometryError when g is not positive definite.
Mat inverse_spd(const Mat& g, std::size_t point);

/// Christoffel symbols and curvature at one point from a jet. When
/// `want_riemann` is false only the Christoffel symbols and inverse metric
/// are filled.
void curvature_at(const MetricJet& jet, const PairTable& pairs, PointCurvature& out, bool want_riemann = true);

/// Rank-3 field Gamma^k_ij, component index k * S + s(i,j).
class ChristoffelField : public Field {
 public:
  ChristoffelField() = default;
  ChristoffelField(const Chart& chart, Validity v) : Field(chart, chart.dim() * sym_size(chart.dim()), std::move(v)) {}
  double get(std::size_t p, int k, int i, int j) const {
    const int n = chart_.dim();
    return data_[p * ncomp_ + k * sym_size(n) + sym_index(i, j, n)];
  }
};

/// Lowered Riemann tensor stored as the pair matrix (see PointCurvature).
class RiemannField : public Field {
 public:
  RiemannField() = default;
  RiemannField(const Chart& chart, Validity v);
  const PairTable& pairs() const { return pairs_; }
  double get(std::size_t p, int i, int j, int k, int l) const;
  PairMat pair_matrix(std::size_t p) const;

 private:
  PairTable pairs_{2};
};

struct CurvatureBundle {
  ChristoffelField christoffel;
  RiemannField riemann;
  SymTensorField ricci;
  ScalarField scalar;

  const Chart& chart() const { return ricci.chart(); }
  const Validity& validity() const { return ricci.validity(); }
};

/// Validity region of derivative-based quantities of `m` for `src`.
Validity derivative_validity(const SampledMetric& m, DerivativeSource src);

/// Jet of the sampled metric at a point (analytic or finite-difference).
void metric_jet(const SampledMetric& m, std::size_t p, std::span<const int> idx, DerivativeSource src,
                MetricJet& jet, bool want_second = true);

ChristoffelField christoffel(const SampledMetric& m, DerivativeSource src = DerivativeSource::Auto);
RiemannField riemann(const SampledMetric& m, const ChristoffelField& gamma,
                     DerivativeSource src = DerivativeSource::Auto);
SymTensorField ricci(const RiemannField& riem, const SampledMetric& m);
ScalarField scalar(const SymTensorField& ric, const SampledMetric& m);

/// All four curvature fields.
CurvatureBundle curvature(const SampledMetric& m, DerivativeSource src = DerivativeSource::Auto);

/// Ricci tensor and scalar curvature only; avoids storing the rank-3/4
/// fields on large grids.
std::pair<SymTensorField, ScalarField> ricci_and_scalar(const SampledMetric& m,
                                                        DerivativeSource src = DerivativeSource::Auto);

/// Delta f = g^ij (d_i d_j f - Gamma^k_ij d_k f).
ScalarField laplacian(const SampledMetric& m, const ChristoffelField& gamma, const ScalarField& f);
ScalarField laplacian(const SampledMetric& m, const ScalarField& f);
/// |grad f|^2 = g^ij d_i f d_j f.
ScalarField grad_norm_sq(const SampledMetric& m, const ScalarField& f);

/// Precomputed coefficients of the Laplacian and gradient norm for
/// repeated application to different scalar fields on a fixed metric.
class LaplaceOperator {
 public:
  LaplaceOperator(const SampledMetric& m, const ChristoffelField& gamma);

  /// Writes Delta f and |grad f|^2 at every valid point of `valid()`.
  void apply(const ScalarField& f, ScalarField& lap, ScalarField& grad2) const;
  const Validity& valid() const { return valid_; }

 private:
  Chart chart_;
  Validity valid_;
  int n_;
  std::vector<double> ginv_;     // S per point
  std::vector<double> contract_; // g^ij Gamma^k_ij, n per point
};

/// Sup-norm violations of the algebraic curvature identities.
struct CurvatureInvariants {
  double antisymmetry = 0.0;   // R_ijkl + R_jikl, R_ijkl + R_ijlk
  double pair_symmetry = 0.0;  // R_ijkl - R_klij
  double bianchi = 0.0;        // R_ijkl + R_iklj + R_iljk
  double ricci_trace = 0.0;    // g^ij Ric_ij - R
};

CurvatureInvariants check_invariants(const CurvatureBundle& b, const SampledMetric& m);

}  // namespace hypfol
