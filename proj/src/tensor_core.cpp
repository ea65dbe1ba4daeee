#include "hypfol/tensor_core.hpp"

#include <cmath>
#include <string>

#include "hypfol/error.hpp"
#include "hypfol/finite_difference.hpp"

namespace hypfol {

PairTable::PairTable(int dim) : n(dim), count(dim * (dim - 1) / 2) {
  int c = 0;
  for (int i = 0; i < kMaxDim; ++i) {
    for (int j = 0; j < kMaxDim; ++j) {
      index[i][j] = -1;
      sign[i][j] = 0;
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++c) {
      index[i][j] = index[j][i] = c;
      sign[i][j] = 1;
      sign[j][i] = -1;
    }
  }
}

Mat inverse_spd(const Mat& g, std::size_t point) {
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) {
    throw GeometryError("metric not positive definite (Cholesky failed) at point " + std::to_string(point));
  }
  return llt.solve(Mat::Identity(g.rows(), g.cols()));
}

void curvature_at(const MetricJet& jet, const PairTable& pairs, PointCurvature& out, bool want_riemann) {
  const int n = jet.n;
  out.n = n;
  out.ginv = inverse_spd(jet.g, 0);

  // Christoffel symbols of the first kind, [p][i][j] = Gamma_{p,ij}.
  double first[kMaxDim][kMaxDim][kMaxDim];
  for (int p = 0; p < n; ++p)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const double v = 0.5 * (jet.d(i, j, p) + jet.d(j, i, p) - jet.d(p, i, j));
        first[p][i][j] = first[p][j][i] = v;
      }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double s = 0.0;
        for (int p = 0; p < n; ++p) s += out.ginv(k, p) * first[p][i][j];
        out.christoffel[k][i][j] = out.christoffel[k][j][i] = s;
      }
  if (!want_riemann) return;

  const int np = pairs.count;
  out.riemann.resize(np, np);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          double v = 0.5 * (jet.dd(j, k, i, l) + jet.dd(i, l, j, k) - jet.dd(i, k, j, l) - jet.dd(j, l, i, k));
          for (int m = 0; m < n; ++m) {
            v += out.christoffel[m][j][k] * first[m][i][l] - out.christoffel[m][j][l] * first[m][i][k];
          }
          out.riemann(pairs.index[i][j], pairs.index[k][l]) = v;
        }

  out.ricci.setZero(n, n);
  for (int j = 0; j < n; ++j)
    for (int l = j; l < n; ++l) {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) s += out.ginv(i, k) * out.R(pairs, i, j, k, l);
      out.ricci(j, l) = out.ricci(l, j) = s;
    }
  out.scalar = (out.ginv.cwiseProduct(out.ricci)).sum();
}

RiemannField::RiemannField(const Chart& chart, Validity v)
    : Field(chart, (chart.dim() * (chart.dim() - 1) / 2) * (chart.dim() * (chart.dim() - 1) / 2), std::move(v)),
      pairs_(chart.dim()) {}

double RiemannField::get(std::size_t p, int i, int j, int k, int l) const {
  if (i == j || k == l) return 0.0;
  return pairs_.sign[i][j] * pairs_.sign[k][l] *
         data_[p * ncomp_ + pairs_.index[i][j] * pairs_.count + pairs_.index[k][l]];
}

PairMat RiemannField::pair_matrix(std::size_t p) const {
  const int np = pairs_.count;
  PairMat m(np, np);
  for (int a = 0; a < np; ++a)
    for (int b = 0; b < np; ++b) m(a, b) = data_[p * ncomp_ + a * np + b];
  return m;
}

Validity derivative_validity(const SampledMetric& m, DerivativeSource src) {
  const bool analytic = src == DerivativeSource::Auto && m.d1 && m.d2;
  const Validity& base = m.gamma.validity();
  return analytic ? base : base.eroded(m.chart(), fd::kHalfWidth);
}

void metric_jet(const SampledMetric& m, std::size_t p, std::span<const int> idx, DerivativeSource src,
                MetricJet& jet, bool want_second) {
  const int n = m.n();
  const int S = sym_size(n);
  const int P = sym_size(n);  // number of (k,l) pairs with k <= l
  jet.n = n;
  jet.g = m.gamma.matrix(p);

  const bool analytic1 = src == DerivativeSource::Auto && m.d1.has_value();
  const bool analytic2 = src == DerivativeSource::Auto && m.d2.has_value();
  if (!analytic1 || (want_second && !analytic2)) {
    double d1[kMaxDim * kMaxSym];
    double d2[kMaxSym * kMaxSym];
    fd::derivatives(m.gamma, p, idx, d1, want_second && !analytic2 ? d2 : nullptr);
    if (!analytic1) {
      for (int k = 0; k < n; ++k)
        for (int s = 0; s < S; ++s) jet.dg[k][s] = d1[k * S + s];
    }
    if (want_second && !analytic2) {
      for (int kl = 0; kl < P; ++kl)
        for (int s = 0; s < S; ++s) jet.ddg[kl][s] = d2[kl * S + s];
    }
  }
  if (analytic1) {
    const auto src1 = m.d1->at(p);
    for (int k = 0; k < n; ++k)
      for (int s = 0; s < S; ++s) jet.dg[k][s] = src1[k * S + s];
  }
  if (want_second && analytic2) {
    const auto src2 = m.d2->at(p);
    for (int kl = 0; kl < P; ++kl)
      for (int s = 0; s < S; ++s) jet.ddg[kl][s] = src2[kl * S + s];
  }
}

namespace {

void store_christoffel(const PointCurvature& pc, std::span<double> dst) {
  const int n = pc.n;
  const int S = sym_size(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) dst[k * S + sym_index(i, j, n)] = pc.christoffel[k][i][j];
}

void store_riemann(const PointCurvature& pc, std::span<double> dst) {
  const int np = static_cast<int>(pc.riemann.rows());
  for (int a = 0; a < np; ++a)
    for (int b = 0; b < np; ++b) dst[a * np + b] = pc.riemann(a, b);
}

}  // namespace

ChristoffelField christoffel(const SampledMetric& m, DerivativeSource src) {
  const Chart& chart = m.chart();
  const Validity valid = derivative_validity(m, src);
  ChristoffelField out(chart, valid);
  PairTable pairs(m.n());
  MetricJet jet;
  PointCurvature pc;
  for_each_valid(chart, valid, [&](std::size_t p, std::span<const int> idx) {
    metric_jet(m, p, idx, src, jet, false);
    try {
      curvature_at(jet, pairs, pc, false);
    } catch (const GeometryError&) {
      throw GeometryError("singular metric at point " + std::to_string(p));
    }
    store_christoffel(pc, out.at(p));
  });
  return out;
}

RiemannField riemann(const SampledMetric& m, const ChristoffelField& gamma, DerivativeSource src) {
  require_same_chart(m.chart(), gamma.chart(), "riemann");
  const Chart& chart = m.chart();
  const Validity valid = derivative_validity(m, src).merged(gamma.validity());
  RiemannField out(chart, valid);
  const PairTable& pairs = out.pairs();
  const int n = m.n();
  const int S = sym_size(n);
  MetricJet jet;
  for_each_valid(chart, valid, [&](std::size_t p, std::span<const int> idx) {
    metric_jet(m, p, idx, src, jet, true);
    const auto G = gamma.at(p);
    double first[kMaxDim][kMaxDim][kMaxDim];
    for (int q = 0; q < n; ++q)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double s = 0.0;
          for (int k = 0; k < n; ++k) s += jet.g(q, k) * G[k * S + sym_index(i, j, n)];
          first[q][i][j] = s;
        }
    auto dst = out.at(p);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = k + 1; l < n; ++l) {
            double v = 0.5 * (jet.dd(j, k, i, l) + jet.dd(i, l, j, k) - jet.dd(i, k, j, l) - jet.dd(j, l, i, k));
            for (int q = 0; q < n; ++q) {
              v += G[q * S + sym_index(j, k, n)] * first[q][i][l] - G[q * S + sym_index(j, l, n)] * first[q][i][k];
            }
            dst[pairs.index[i][j] * pairs.count + pairs.index[k][l]] = v;
          }
  });
  return out;
}

SymTensorField ricci(const RiemannField& riem, const SampledMetric& m) {
  require_same_chart(riem.chart(), m.chart(), "ricci");
  const int n = m.n();
  SymTensorField out(m.chart(), riem.validity());
  for_each_valid(m.chart(), riem.validity(), [&](std::size_t p, auto) {
    const Mat ginv = inverse_spd(m.gamma.matrix(p), p);
    Mat ric(n, n);
    for (int j = 0; j < n; ++j)
      for (int l = j; l < n; ++l) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
          for (int k = 0; k < n; ++k) s += ginv(i, k) * riem.get(p, i, j, k, l);
        ric(j, l) = ric(l, j) = s;
      }
    out.set_symmetrized(p, ric);
  });
  return out;
}

ScalarField scalar(const SymTensorField& ric, const SampledMetric& m) {
  require_same_chart(ric.chart(), m.chart(), "scalar");
  ScalarField out(m.chart(), ric.validity());
  for_each_valid(m.chart(), ric.validity(), [&](std::size_t p, auto) {
    const Mat ginv = inverse_spd(m.gamma.matrix(p), p);
    out[p] = ginv.cwiseProduct(ric.matrix(p)).sum();
  });
  return out;
}

CurvatureBundle curvature(const SampledMetric& m, DerivativeSource src) {
  const Chart& chart = m.chart();
  const Validity valid = derivative_validity(m, src);
  CurvatureBundle b{ChristoffelField(chart, valid), RiemannField(chart, valid), SymTensorField(chart, valid),
                    ScalarField(chart, valid)};
  const PairTable& pairs = b.riemann.pairs();
  MetricJet jet;
  PointCurvature pc;
  for_each_valid(chart, valid, [&](std::size_t p, std::span<const int> idx) {
    metric_jet(m, p, idx, src, jet, true);
    curvature_at(jet, pairs, pc, true);
    store_christoffel(pc, b.christoffel.at(p));
    store_riemann(pc, b.riemann.at(p));
    b.ricci.set_symmetrized(p, pc.ricci);
    b.scalar[p] = pc.scalar;
  });
  return b;
}

std::pair<SymTensorField, ScalarField> ricci_and_scalar(const SampledMetric& m, DerivativeSource src) {
  const Chart& chart = m.chart();
  const Validity valid = derivative_validity(m, src);
  SymTensorField ric(chart, valid);
  ScalarField R(chart, valid);
  PairTable pairs(m.n());
  MetricJet jet;
  PointCurvature pc;
  for_each_valid(chart, valid, [&](std::size_t p, std::span<const int> idx) {
    metric_jet(m, p, idx, src, jet, true);
    curvature_at(jet, pairs, pc, true);
    ric.set_symmetrized(p, pc.ricci);
    R[p] = pc.scalar;
  });
  return {std::move(ric), std::move(R)};
}

LaplaceOperator::LaplaceOperator(const SampledMetric& m, const ChristoffelField& gamma)
    : chart_(m.chart()), n_(m.n()) {
  require_same_chart(m.chart(), gamma.chart(), "laplacian");
  valid_ = gamma.validity().merged(Validity::full(chart_).eroded(chart_, fd::kHalfWidth));
  const int n = n_;
  const int S = sym_size(n);
  ginv_.assign(chart_.size() * S, 0.0);
  contract_.assign(chart_.size() * n, 0.0);
  for_each_valid(chart_, valid_, [&](std::size_t p, auto) {
    const Mat ginv = inverse_spd(m.gamma.matrix(p), p);
    const auto G = gamma.at(p);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) ginv_[p * S + sym_index(i, j, n)] = ginv(i, j);
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s += ginv(i, j) * G[k * S + sym_index(i, j, n)];
      contract_[p * n + k] = s;
    }
  });
}

void LaplaceOperator::apply(const ScalarField& f, ScalarField& lap, ScalarField& grad2) const {
  require_same_chart(chart_, f.chart(), "laplacian");
  const int n = n_;
  const int S = sym_size(n);
  double d1[kMaxDim];
  double d2[kMaxSym];
  for_each_valid(chart_, valid_, [&](std::size_t p, std::span<const int> idx) {
    fd::derivatives(f, p, idx, d1, d2);
    const double* gi = ginv_.data() + p * S;
    const double* c = contract_.data() + p * n;
    double l = 0.0, g2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const int ii = sym_index(i, i, n);
      l += gi[ii] * d2[ii];
      g2 += gi[ii] * d1[i] * d1[i];
      for (int j = i + 1; j < n; ++j) {
        const int ij = sym_index(i, j, n);
        l += 2.0 * gi[ij] * d2[ij];
        g2 += 2.0 * gi[ij] * d1[i] * d1[j];
      }
      l -= c[i] * d1[i];
    }
    lap[p] = l;
    grad2[p] = g2;
  });
}

ScalarField laplacian(const SampledMetric& m, const ChristoffelField& gamma, const ScalarField& f) {
  LaplaceOperator op(m, gamma);
  ScalarField lap(m.chart(), op.valid().merged(f.validity().eroded(m.chart(), fd::kHalfWidth)));
  ScalarField g2(m.chart(), op.valid());
  op.apply(f, lap, g2);
  return lap;
}

ScalarField laplacian(const SampledMetric& m, const ScalarField& f) { return laplacian(m, christoffel(m), f); }

ScalarField grad_norm_sq(const SampledMetric& m, const ScalarField& f) {
  require_same_chart(m.chart(), f.chart(), "grad_norm_sq");
  const Chart& chart = m.chart();
  const int n = m.n();
  ScalarField out(chart, f.validity().eroded(chart, fd::kHalfWidth));
  double d1[kMaxDim];
  for_each_valid(chart, out.validity(), [&](std::size_t p, std::span<const int> idx) {
    fd::gradient(f, p, idx, 0, d1);
    const Mat ginv = inverse_spd(m.gamma.matrix(p), p);
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += ginv(i, j) * d1[i] * d1[j];
    out[p] = s;
  });
  return out;
}

CurvatureInvariants check_invariants(const CurvatureBundle& b, const SampledMetric& m) {
  CurvatureInvariants inv;
  const int n = m.n();
  const RiemannField& R = b.riemann;
  for_each_valid(b.chart(), b.validity(), [&](std::size_t p, auto) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            const double r = R.get(p, i, j, k, l);
            inv.antisymmetry = std::max({inv.antisymmetry, std::abs(r + R.get(p, j, i, k, l)),
                                         std::abs(r + R.get(p, i, j, l, k))});
            inv.pair_symmetry = std::max(inv.pair_symmetry, std::abs(r - R.get(p, k, l, i, j)));
            inv.bianchi =
                std::max(inv.bianchi, std::abs(r + R.get(p, i, k, l, j) + R.get(p, i, l, j, k)));
          }
    const Mat ginv = inverse_spd(m.gamma.matrix(p), p);
    inv.ricci_trace = std::max(inv.ricci_trace, std::abs(ginv.cwiseProduct(b.ricci.matrix(p)).sum() - b.scalar[p]));
  });
  return inv;
}

}  // namespace hypfol
