#include "hypfol/normal_form.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "hypfol/error.hpp"
#include "hypfol/finite_difference.hpp"

namespace hypfol {

Mat FGExpansion::g_r(std::size_t p, double r) const {
  const double r2 = r * r;
  return gamma.matrix(p) - r2 * P.matrix(p) + (0.25 * r2 * r2) * Q.matrix(p);
}

Mat FGExpansion::g_r_prime(std::size_t p, double r) const {
  return -2.0 * r * P.matrix(p) + (r * r * r) * Q.matrix(p);
}

double FGExpansion::r_max(std::size_t p) const {
  const double lmax = eigen_rel(gamma.matrix(p), P.matrix(p)).lambda.maxCoeff();
  return lmax > 0.0 ? std::sqrt(2.0 / lmax) : std::numeric_limits<double>::infinity();
}

double FGExpansion::r_max() const {
  double r = std::numeric_limits<double>::infinity();
  for_each_valid(chart(), validity(), [&](std::size_t p, auto) { r = std::min(r, r_max(p)); });
  return r;
}

FGExpansion build_expansion(const SymTensorField& gamma, const SymTensorField& P) {
  require_same_chart(gamma.chart(), P.chart(), "build_expansion");
  FGExpansion e{gamma, P, q_tensor(gamma, P)};
  e.P.set_validity(gamma.validity().merged(P.validity()));
  return e;
}

SymTensorField slice_metric(const FGExpansion& e, double r) {
  SymTensorField g(e.chart(), e.validity());
  for (std::size_t p = 0; p < e.chart().size(); ++p) g.set_symmetrized(p, e.g_r(p, r));
  return g;
}

LevelSetGeometry fundamental_forms(const FGExpansion& e, double r) {
  const double rmax = e.r_max();
  if (!(r > 0.0) || !(r < rmax)) {
    throw GeometryError("fundamental_forms: r = " + std::to_string(r) + " outside (0, " + std::to_string(rmax) + ")");
  }
  const Validity& v = e.validity();
  LevelSetGeometry geom{r, SymTensorField(e.chart(), v), SymTensorField(e.chart(), v), SymTensorField(e.chart(), v)};
  const double a = 1.0 / (r * r);
  const double b = 0.25 * r * r;
  for_each_valid(e.chart(), v, [&](std::size_t p, auto) {
    const Mat g = e.gamma.matrix(p);
    const Mat P = e.P.matrix(p);
    const Mat Q = e.Q.matrix(p);
    geom.I.set_symmetrized(p, a * g - P + b * Q);
    geom.II.set_symmetrized(p, -a * g + b * Q);
    geom.III.set_symmetrized(p, a * g + P + b * Q);
  });
  return geom;
}

Mat Weingarten::shape_operator(std::size_t p) const {
  const int n = kappa.ncomp();
  Mat m(n, n);
  const auto d = shape.at(p);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) m(i, j) = d[j * n + i];
  return m;
}

Weingarten weingarten(const LevelSetGeometry& geom) {
  const Chart& chart = geom.I.chart();
  const int n = geom.I.n();
  const Validity& v = geom.I.validity();
  Weingarten w{VecField(chart, n, v), Field(chart, n * n, v)};
  for_each_valid(chart, v, [&](std::size_t p, auto) {
    const Mat I = geom.I.matrix(p);
    const Mat II = geom.II.matrix(p);
    Eigen::LLT<Mat> llt(I);
    if (llt.info() != Eigen::Success) {
      throw GeometryError("weingarten: first fundamental form singular at point " + std::to_string(p));
    }
    const Mat S = llt.solve(II);
    const double scale = I.diagonal().maxCoeff();
    const RelativeEigen e = eigen_rel(I / scale, II / scale);
    auto sd = w.shape.at(p);
    for (int j = 0; j < n; ++j) {
      w.kappa.ref(p, j) = e.lambda(j);
      for (int i = 0; i < n; ++i) sd[j * n + i] = S(i, j);
    }
  });
  return w;
}

double kappa_closed_form(double r, double lambda) {
  const double a = 0.5 * r * r * lambda;
  return -(1.0 + a) / (1.0 - a);
}

VecField curvature_radii(const VecField& kappa) {
  const int n = kappa.ncomp();
  VecField rho(kappa.chart(), n, kappa.validity());
  for_each_valid(kappa.chart(), kappa.validity(), [&](std::size_t p, auto) {
    for (int i = 0; i < n; ++i) {
      const double k = kappa.get(p, i);
      if (!(k < 1.0)) {
        throw GeometryError("curvature_radii: kappa = " + std::to_string(k) + " >= 1 at point " + std::to_string(p));
      }
      rho.ref(p, i) = 2.0 / (1.0 - k);
    }
  });
  return rho;
}

VecField key_identity_residual(double r, const SpectralField& spectral, const VecField& kappa) {
  require_same_chart(spectral.chart(), kappa.chart(), "key_identity_residual");
  const int n = spectral.n();
  const Validity v = spectral.validity().merged(kappa.validity());
  VecField res(spectral.chart(), n, v);
  const double a = 0.5 * r * r;
  for_each_valid(spectral.chart(), v, [&](std::size_t p, auto) {
    for (int i = 0; i < n; ++i) {
      const double k = kappa.get(p, n - 1 - i);
      res.ref(p, i) = std::abs(1.0 - a * spectral.lambda(p, i) - 2.0 / (1.0 - k));
    }
  });
  return res;
}

VecField key_identity_closed_form_residual(double r, const SpectralField& spectral) {
  const int n = spectral.n();
  VecField res(spectral.chart(), n, spectral.validity());
  const double a = 0.5 * r * r;
  for_each_valid(spectral.chart(), spectral.validity(), [&](std::size_t p, auto) {
    for (int i = 0; i < n; ++i) {
      const double l = spectral.lambda(p, i);
      res.ref(p, i) = std::abs(1.0 - a * l - 2.0 / (1.0 - kappa_closed_form(r, l)));
    }
  });
  return res;
}

HorosphericalMetric horospherical_metric(const FGExpansion& e, const LevelSetGeometry& geom) {
  const Validity& v = geom.I.validity();
  HorosphericalMetric out{SymTensorField(e.chart(), v), 0.0};
  const double c = 4.0 / (geom.r * geom.r);
  for_each_valid(e.chart(), v, [&](std::size_t p, auto) {
    const Mat h = geom.I.matrix(p) - 2.0 * geom.II.matrix(p) + geom.III.matrix(p);
    out.h.set_symmetrized(p, h);
    out.residual = std::max(out.residual, (h - c * e.gamma.matrix(p)).cwiseAbs().maxCoeff());
  });
  return out;
}

namespace {

/// Bivector transform B[(ij),(ab)] = E_ia E_jb - E_ib E_ja.
PairMat bivector_map(const Mat& E, const PairTable& pairs) {
  const int n = static_cast<int>(E.rows());
  PairMat B(pairs.count, pairs.count);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
          B(pairs.index[i][j], pairs.index[a][b]) = E(i, a) * E(j, b) - E(i, b) * E(j, a);
        }
  return B;
}

}  // namespace

BulkResidual bulk_curvature_residual(const FGExpansion& e, double r0, const BulkOptions& opt) {
  const Chart& bchart = e.chart();
  const int n = e.n();
  if (n + 1 > kMaxDim) throw GeometryError("bulk_curvature_residual: n + 1 exceeds supported dimension");
  if (opt.slices < 2 * fd::kHalfWidth + 1) {
    throw GeometryError("bulk_curvature_residual: radial window needs at least 5 slices");
  }
  const int half = opt.slices / 2;
  const double delta = opt.delta > 0.0 ? opt.delta : r0 / std::max(20, bchart.max_resolution());
  if (!(r0 - half * delta > 0.0) || !(r0 + half * delta < e.r_max())) {
    throw GeometryError("bulk_curvature_residual: radial window outside the admissible range of r");
  }

  std::vector<Axis> axes = bchart.axes();
  axes.push_back(Axis{r0 - half * delta, r0 - half * delta + (opt.slices - 1) * delta, opt.slices, false});
  const Chart chart(axes);

  Validity bv = e.validity();
  bv.margin.push_back(0);
  SymTensorField g(chart, bv);
  const std::size_t nb = bchart.size();
  for (int s = 0; s < opt.slices; ++s) {
    const double r = axes[n].coord(s);
    const double w = 1.0 / (r * r);
    for (std::size_t q = 0; q < nb; ++q) {
      Mat m = Mat::Zero(n + 1, n + 1);
      m.topLeftCorner(n, n) = w * e.g_r(q, r);
      m(n, n) = w;
      g.set_symmetrized(q + s * nb, m);
    }
  }
  const SampledMetric bulk = from_samples(std::move(g));

  Validity center = derivative_validity(bulk, DerivativeSource::FiniteDifference);
  center.margin[n] = half;

  const Validity face{std::vector<int>(center.margin.begin(), center.margin.end() - 1)};
  BulkResidual out{ScalarField(bchart, face), 0.0, delta};
  PairTable pairs(n + 1);
  MetricJet jet;
  PointCurvature pc;
  const PairMat I = PairMat::Identity(pairs.count, pairs.count);
  for_each_valid(chart, center, [&](std::size_t p, std::span<const int> id) {
    metric_jet(bulk, p, id, DerivativeSource::FiniteDifference, jet, true);
    curvature_at(jet, pairs, pc, true);
    Eigen::LLT<Mat> llt(jet.g);
    const Mat E = llt.matrixU().solve(Mat::Identity(n + 1, n + 1));
    const PairMat B = bivector_map(E, pairs);
    const double v = (B.transpose() * pc.riemann * B + I).cwiseAbs().maxCoeff();
    const std::size_t q = p - static_cast<std::size_t>(half) * nb;
    out.field[q] = v;
    out.sup = std::max(out.sup, v);
  });
  return out;
}

ScalarField tangential_decomposition_residual(const FGExpansion& e, double r) {
  const int n = e.n();
  const SampledMetric gr = from_samples(slice_metric(e, r));
  const CurvatureBundle b = curvature(gr, DerivativeSource::FiniteDifference);
  ScalarField out(e.chart(), b.validity());
  const RiemannField& R = b.riemann;
  for_each_valid(e.chart(), b.validity(), [&](std::size_t p, auto) {
    const Mat g = gr.gamma.matrix(p);
    const Mat d = e.g_r_prime(p, r);
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            const double v = r * R.get(p, i, j, k, l) -
                             0.5 * (g(i, l) * d(j, k) + d(i, l) * g(j, k) - d(i, k) * g(j, l) - g(i, k) * d(j, l)) +
                             0.25 * r * (d(i, l) * d(j, k) - d(i, k) * d(j, l));
            worst = std::max(worst, std::abs(v));
          }
    out[p] = worst;
  });
  return out;
}

AmbientResidual ambient_expansion_check(const FGExpansion& e) {
  // Coefficients of g_r in powers of r^2 mapped to powers of rho: c_k = a_k (-2)^k.
  AmbientResidual res;
  for_each_valid(e.chart(), e.validity(), [&](std::size_t p, auto) {
    const Mat a1 = -e.P.matrix(p);
    const Mat a2 = 0.25 * e.Q.matrix(p);
    const Mat a3 = Mat::Zero(e.n(), e.n());
    const Mat c1 = -2.0 * a1;
    const Mat c2 = 4.0 * a2;
    const Mat c3 = -8.0 * a3;
    res.first = std::max(res.first, (c1 - 2.0 * e.P.matrix(p)).cwiseAbs().maxCoeff());
    res.second = std::max(res.second, (2.0 * c2 - 2.0 * e.Q.matrix(p)).cwiseAbs().maxCoeff());
    res.third = std::max(res.third, (6.0 * c3).cwiseAbs().maxCoeff());
  });
  return res;
}

}  // namespace hypfol
