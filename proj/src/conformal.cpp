#include "hypfol/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hypfol/error.hpp"
#include "hypfol/finite_difference.hpp"

namespace hypfol {

RelativeEigen eigen_rel(const Mat& g, const Mat& P) {
  if (Eigen::LLT<Mat>(g).info() != Eigen::Success) throw GeometryError("eigen_rel: metric not positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(P, g, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) throw GeometryError("eigen_rel: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

SpectralField::SpectralField(const Chart& chart, int n, Validity v)
    : chart_(chart), valid_(std::move(v)), n_(n), lambda_(chart.size() * n, 0.0), vectors_(chart.size() * n * n, 0.0) {}

Vec SpectralField::eigenvalues(std::size_t p) const {
  Vec v(n_);
  for (int i = 0; i < n_; ++i) v(i) = lambda_[p * n_ + i];
  return v;
}

Mat SpectralField::eigenvectors(std::size_t p) const {
  Mat m(n_, n_);
  const double* d = vectors_.data() + p * n_ * n_;
  for (int j = 0; j < n_; ++j)
    for (int i = 0; i < n_; ++i) m(i, j) = d[j * n_ + i];
  return m;
}

void SpectralField::set(std::size_t p, const RelativeEigen& e) {
  double* d = vectors_.data() + p * n_ * n_;
  for (int j = 0; j < n_; ++j) {
    lambda_[p * n_ + j] = e.lambda(j);
    for (int i = 0; i < n_; ++i) d[j * n_ + i] = e.vectors(i, j);
  }
}

SpectralField eigen_rel(const SymTensorField& gamma, const SymTensorField& P) {
  require_same_chart(gamma.chart(), P.chart(), "eigen_rel");
  const Validity v = gamma.validity().merged(P.validity());
  SpectralField out(gamma.chart(), gamma.n(), v);
  for_each_valid(gamma.chart(), v, [&](std::size_t p, auto) {
    try {
      out.set(p, eigen_rel(gamma.matrix(p), P.matrix(p)));
    } catch (const GeometryError&) {
      throw GeometryError("eigen_rel: metric not positive definite at point " + std::to_string(p));
    }
  });
  return out;
}

SymTensorField schouten(const SymTensorField& gamma, const SymTensorField& ric, const ScalarField& R) {
  const int n = gamma.n();
  if (n < 3) throw GeometryError("schouten: requires n >= 3; use check_p2 for n = 2");
  require_same_chart(gamma.chart(), ric.chart(), "schouten");
  require_same_chart(gamma.chart(), R.chart(), "schouten");
  const Validity v = ric.validity().merged(R.validity());
  SymTensorField P(gamma.chart(), v);
  const double a = 1.0 / (2.0 * (n - 1));
  const double b = 1.0 / (n - 2);
  for_each_valid(gamma.chart(), v, [&](std::size_t p, auto) {
    P.set_symmetrized(p, b * (ric.matrix(p) - a * R[p] * gamma.matrix(p)));
  });
  return P;
}

SymTensorField schouten(const SampledMetric& m, const CurvatureBundle& b) {
  return schouten(m.gamma, b.ricci, b.scalar);
}

Mat q_tensor(const Mat& g, const Mat& P) {
  const Mat ginv = inverse_spd(g, 0);
  return P * ginv * P;
}

SymTensorField q_tensor(const SymTensorField& gamma, const SymTensorField& P) {
  require_same_chart(gamma.chart(), P.chart(), "q_tensor");
  const Validity v = gamma.validity().merged(P.validity());
  SymTensorField Q(gamma.chart(), v);
  for_each_valid(gamma.chart(), v, [&](std::size_t p, auto) {
    Q.set_symmetrized(p, P.matrix(p) * inverse_spd(gamma.matrix(p), p) * P.matrix(p));
  });
  return Q;
}

P2Residual check_p2(const SampledMetric& m, const SymTensorField& P, const CurvatureBundle& b) {
  const Chart& chart = m.chart();
  const int n = m.n();
  require_same_chart(chart, P.chart(), "check_p2");
  require_same_chart(chart, b.chart(), "check_p2");
  P2Residual res;

  const Validity vt = P.validity().merged(b.validity());
  for_each_valid(chart, vt, [&](std::size_t p, auto) {
    const Mat ginv = inverse_spd(m.gamma.matrix(p), p);
    res.trace = std::max(res.trace, std::abs(ginv.cwiseProduct(P.matrix(p)).sum() - 0.5 * b.scalar[p]));
  });

  const int S = sym_size(n);
  const Validity vd = vt.eroded(chart, fd::kHalfWidth);
  double dP[kMaxDim * kMaxSym];
  double dR[kMaxDim];
  for_each_valid(chart, vd, [&](std::size_t p, std::span<const int> idx) {
    fd::derivatives(P, p, idx, dP, nullptr);
    fd::gradient(b.scalar, p, idx, 0, dR);
    const Mat ginv = inverse_spd(m.gamma.matrix(p), p);
    const Mat Pm = P.matrix(p);
    Vec div = Vec::Zero(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double cov = dP[k * S + sym_index(i, j, n)];
          for (int q = 0; q < n; ++q) {
            cov -= b.christoffel.get(p, q, k, i) * Pm(q, j) + b.christoffel.get(p, q, k, j) * Pm(i, q);
          }
          div(i) += ginv(j, k) * cov;
        }
    for (int i = 0; i < n; ++i) div(i) -= dR[i];
    res.divergence = std::max(res.divergence, std::sqrt(std::max(0.0, div.dot(ginv * div))));
  });
  return res;
}

namespace {

void conformal_scalar_into(int n, const LaplaceOperator& op, const ScalarField& R, const ScalarField& phi,
                           ScalarField& lap, ScalarField& g2, ScalarField& out, const Validity& v) {
  op.apply(phi, lap, g2);
  const double c1 = 2.0 * (n - 1);
  const double c2 = (n - 1.0) * (n - 2.0);
  for_each_valid(phi.chart(), v, [&](std::size_t p, auto) {
    out[p] = std::exp(-2.0 * phi[p]) * (R[p] - c1 * lap[p] - c2 * g2[p]);
  });
}

}  // namespace

ScalarField conformal_scalar(const SampledMetric& m, const ChristoffelField& gamma, const ScalarField& R,
                             const ScalarField& phi) {
  require_same_chart(m.chart(), R.chart(), "conformal_scalar");
  require_same_chart(m.chart(), phi.chart(), "conformal_scalar");
  LaplaceOperator op(m, gamma);
  const Validity v = op.valid().merged(R.validity()).merged(phi.validity().eroded(m.chart(), fd::kHalfWidth));
  ScalarField lap(m.chart(), op.valid()), g2(m.chart(), op.valid()), out(m.chart(), v);
  conformal_scalar_into(m.n(), op, R, phi, lap, g2, out, v);
  return out;
}

ScalarField conformal_scalar(const SampledMetric& m, const CurvatureBundle& b, const ScalarField& phi) {
  return conformal_scalar(m, b.christoffel, b.scalar, phi);
}

SampledMetric conformal_metric(const SampledMetric& m, const ScalarField& phi) {
  require_same_chart(m.chart(), phi.chart(), "conformal_metric");
  SymTensorField g(m.chart(), m.gamma.validity().merged(phi.validity()));
  for (std::size_t p = 0; p < m.chart().size(); ++p) {
    g.set_symmetrized(p, std::exp(2.0 * phi[p]) * m.gamma.matrix(p));
  }
  return from_samples(std::move(g));
}

bool YamabeReport::monotone_after(int transient) const {
  for (std::size_t s = static_cast<std::size_t>(std::max(transient, 0)) + 1; s < residual_history.size(); ++s) {
    if (residual_history[s] > residual_history[s - 1]) return false;
  }
  return true;
}

YamabeResult yamabe_flow(const SampledMetric& m, const ChristoffelField& gamma, const ScalarField& R,
                         const YamabeConfig& cfg) {
  const Chart& chart = m.chart();
  const int n = m.n();
  if (n < 3) throw GeometryError("yamabe_flow: requires n >= 3");
  if (!(cfg.dt_factor > 0.0) || !(cfg.tol > 0.0) || cfg.max_steps < 0) {
    throw SpecError("yamabe_flow: dt_factor and tol must be positive, max_steps non-negative");
  }

  LaplaceOperator op(m, gamma);
  const Validity v = op.valid().merged(R.validity());
  if (v.empty(chart)) throw GeometryError("yamabe_flow: no valid interior points");

  std::vector<std::size_t> pts;
  std::vector<double> sqrt_det;
  for_each_valid(chart, v, [&](std::size_t p, auto) {
    pts.push_back(p);
    sqrt_det.push_back(std::sqrt(m.gamma.matrix(p).determinant()));
  });

  const double h = chart.min_spacing();
  YamabeResult res{ScalarField(chart), {}};
  YamabeReport& rep = res.report;
  rep.dt = cfg.dt_factor * h * h / (n * (n - 1.0));

  ScalarField lap(chart, op.valid()), g2(chart, op.valid()), Rt(chart, v);
  ScalarField& phi = res.phi;
  double prev_volume = -1.0;
  double best = std::numeric_limits<double>::infinity();

  for (int step = 0;; ++step) {
    conformal_scalar_into(n, op, R, phi, lap, g2, Rt, v);
    double wsum = 0.0, wR = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const double w = std::exp(n * phi[pts[k]]) * sqrt_det[k];
      wsum += w;
      wR += w * Rt[pts[k]];
    }
    const double mean = wR / wsum;
    double sup = 0.0;
    for (std::size_t p : pts) sup = std::max(sup, std::abs(Rt[p] - mean));
    const double resid = sup / std::max(1.0, std::abs(mean));

    if (!std::isfinite(resid)) {
      rep.aborted = true;
      rep.diagnostic = "non-finite residual at step " + std::to_string(step);
      break;
    }
    if (prev_volume > 0.0) {
      rep.max_volume_drift = std::max(rep.max_volume_drift, std::abs(wsum - prev_volume) / prev_volume);
    }
    prev_volume = wsum;
    rep.residual_history.push_back(resid);
    rep.mean_history.push_back(mean);
    rep.steps = step;
    rep.mean_R = mean;
    rep.residual = resid;

    if (resid < cfg.tol) {
      rep.converged = true;
      break;
    }
    best = std::min(best, resid);
    if (resid > cfg.growth_limit * best) {
      rep.aborted = true;
      rep.diagnostic = "residual grew from " + std::to_string(best) + " to " + std::to_string(resid) +
                       " at step " + std::to_string(step) + "; reduce dt_factor";
      break;
    }
    if (step >= cfg.max_steps) {
      rep.diagnostic = "not converged after " + std::to_string(cfg.max_steps) + " steps";
      break;
    }
    for (std::size_t p : pts) phi[p] += rep.dt * (mean - Rt[p]);
  }
  return res;
}

YamabeResult yamabe_flow(const SampledMetric& m, const CurvatureBundle& b, const YamabeConfig& cfg) {
  return yamabe_flow(m, b.christoffel, b.scalar, cfg);
}

}  // namespace hypfol
