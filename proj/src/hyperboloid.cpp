#include "hypfol/hyperboloid.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <string>

#include "hypfol/error.hpp"

namespace hypfol {

namespace {

// One-sided halves of central first-derivative stencils: f' ~ sum_k c_k (f(x+kh) - f(x-kh)) / h.
constexpr double kC4[] = {2.0 / 3.0, -1.0 / 12.0};
constexpr double kC6[] = {3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0};
constexpr double kC8[] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};

std::span<const double> stencil(int order) {
  switch (order) {
    case 4: return kC4;
    case 6: return kC6;
    case 8: return kC8;
    default: throw SpecError("unsupported stencil order " + std::to_string(order));
  }
}

template <class F>
LorentzVector diff(const F& f, double u, double v, double h, bool along_u, int order) {
  LorentzVector acc = LorentzVector::Zero();
  const auto c = stencil(order);
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double s = (k + 1.0) * h;
    acc += c[k] * (along_u ? f(u + s, v) - f(u - s, v) : f(u, v + s) - f(u, v - s));
  }
  return acc / h;
}

Eigen::Matrix2d gram(const LorentzVector& a0, const LorentzVector& a1, const LorentzVector& b0,
                     const LorentzVector& b1) {
  Eigen::Matrix2d m;
  m(0, 0) = minkowski(a0, b0);
  m(0, 1) = minkowski(a0, b1);
  m(1, 0) = minkowski(a1, b0);
  m(1, 1) = minkowski(a1, b1);
  return m;
}

Eigen::Vector2d relative_eigenvalues(const Eigen::Matrix2d& A, const Eigen::Matrix2d& B, std::size_t p) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> es(A, B, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw GeometryError("first fundamental form singular at sample " + std::to_string(p));
  }
  return es.eigenvalues();
}

Eigen::Vector3d sphere_point(double theta, double ph) {
  return {std::sin(theta) * std::cos(ph), std::sin(theta) * std::sin(ph), std::cos(theta)};
}

ParamGrid sphere_grid(int nt, int np) { return {nt, np, 0.0, std::numbers::pi, 0.0, 2.0 * std::numbers::pi}; }

}  // namespace

LorentzVector Immersion::phi_u(double u, double v) const {
  return diff(phi, u, v, grid.du(), true, fd_order);
}

LorentzVector Immersion::phi_v(double u, double v) const {
  return diff(phi, u, v, grid.dv(), false, fd_order);
}

namespace {

LorentzVector unoriented_normal(const Immersion& imm, double u, double v) {
  const LorentzVector p = imm.phi(u, v);
  const LorentzVector pu = imm.phi_u(u, v);
  const LorentzVector pv = imm.phi_v(u, v);
  const Eigen::Vector4d J(1.0, 1.0, 1.0, -1.0);
  Eigen::Matrix<double, 3, 4> A;
  A.row(0) = p.cwiseProduct(J).transpose();
  A.row(1) = pu.cwiseProduct(J).transpose();
  A.row(2) = pv.cwiseProduct(J).transpose();
  const Eigen::FullPivLU<Eigen::Matrix<double, 3, 4>> lu(A);
  if (lu.rank() != 3) throw GeometryError(imm.name + ": immersion not regular at (" + std::to_string(u) + ", " +
                                          std::to_string(v) + ")");
  LorentzVector eta = lu.kernel().col(0);
  const double nn = minkowski(eta, eta);
  if (!(nn > 0.0)) throw GeometryError(imm.name + ": normal is not spacelike");
  return eta / std::sqrt(nn);
}

}  // namespace

LorentzVector Immersion::normal(double u, double v) const {
  LorentzVector eta = unoriented_normal(*this, u, v);
  Eigen::Matrix4d frame;
  frame << phi(u, v), phi_u(u, v), phi_v(u, v), eta;
  const int want = orientation == Orientation::Outward ? outward_sign : -outward_sign;
  if ((frame.determinant() > 0.0 ? 1 : -1) != want) eta = -eta;
  return eta;
}

LorentzVector Immersion::normal_near(double u, double v, const LorentzVector& ref) const {
  LorentzVector eta = unoriented_normal(*this, u, v);
  return eta.dot(ref) < 0.0 ? LorentzVector(-eta) : eta;
}

Immersion geodesic_sphere(double d, int n_theta, int n_phi, Orientation o) {
  if (!(d > 0.0)) throw SpecError("geodesic_sphere: d must be positive");
  Immersion imm;
  imm.name = "geodesic-sphere";
  imm.grid = sphere_grid(n_theta, n_phi);
  imm.orientation = o;
  imm.outward_sign = -1;
  const double s = std::sinh(d), c = std::cosh(d);
  imm.phi = [s, c](double th, double ph) {
    LorentzVector x;
    x << s * sphere_point(th, ph), c;
    return x;
  };
  return imm;
}

Immersion radial_graph(std::function<double(double, double)> rho, int n_theta, int n_phi, Orientation o) {
  Immersion imm;
  imm.name = "radial-graph";
  imm.grid = sphere_grid(n_theta, n_phi);
  imm.orientation = o;
  imm.outward_sign = -1;
  imm.phi = [rho = std::move(rho)](double th, double ph) {
    const double r = rho(th, ph);
    LorentzVector x;
    x << std::sinh(r) * sphere_point(th, ph), std::cosh(r);
    return x;
  };
  return imm;
}

Immersion horosphere(int n, double half_width, Orientation o) {
  Immersion imm;
  imm.name = "horosphere";
  imm.grid = {n, n, -half_width, half_width, -half_width, half_width};
  imm.orientation = o;
  imm.outward_sign = 1;
  imm.phi = [](double u, double v) {
    const double q = u * u + v * v;
    return LorentzVector(u, v, 0.5 * q, 1.0 + 0.5 * q);
  };
  return imm;
}

Immersion totally_geodesic_plane(int n, double half_width, Orientation o) {
  Immersion imm;
  imm.name = "totally-geodesic-plane";
  imm.grid = {n, n, -half_width, half_width, -half_width, half_width};
  imm.orientation = o;
  imm.outward_sign = 1;
  imm.phi = [](double u, double v) {
    return LorentzVector(std::sinh(u), std::cosh(u) * std::sinh(v), 0.0, std::cosh(u) * std::cosh(v));
  };
  return imm;
}

Immersion geodesic_tube(double rho, int n, double half_length, Orientation o) {
  if (!(rho > 0.0)) throw SpecError("geodesic_tube: rho must be positive");
  Immersion imm;
  imm.name = "geodesic-tube";
  imm.grid = {n, n, -half_length, half_length, 0.0, 2.0 * std::numbers::pi};
  imm.orientation = o;
  imm.outward_sign = 1;
  const double ch = std::cosh(rho), sh = std::sinh(rho);
  imm.phi = [ch, sh](double s, double th) {
    return LorentzVector(ch * std::sinh(s), sh * std::cos(th), sh * std::sin(th), ch * std::cosh(s));
  };
  return imm;
}

ImmersionSamples sample_immersion(const Immersion& imm) {
  const ParamGrid& g = imm.grid;
  ImmersionSamples s;
  s.phi.resize(g.size());
  s.eta.resize(g.size());
  s.psi.resize(g.size());
  for (int j = 0; j < g.nv; ++j)
    for (int i = 0; i < g.nu; ++i) {
      const double u = g.u(i), v = g.v(j);
      const std::size_t p = g.index(i, j);
      s.phi[p] = imm.phi(u, v);
      if (std::abs(minkowski(s.phi[p], s.phi[p]) + 1.0) > 1e-12 || !(s.phi[p](3) > 0.0)) {
        throw GeometryError(imm.name + ": sample " + std::to_string(p) + " is not on the hyperboloid");
      }
      s.eta[p] = imm.normal(u, v);
      const LorentzVector pu = imm.phi_u(u, v), pv = imm.phi_v(u, v);
      const double scale = std::max({1.0, pu.norm(), pv.norm()});
      const double defect = std::max({std::abs(minkowski(s.eta[p], s.eta[p]) - 1.0),
                                      std::abs(minkowski(s.eta[p], s.phi[p])),
                                      std::abs(minkowski(s.eta[p], pu)) / scale,
                                      std::abs(minkowski(s.eta[p], pv)) / scale});
      if (defect > 1e-10) {
        throw GeometryError(imm.name + ": normal constraints violated at sample " + std::to_string(p));
      }
      s.psi[p] = s.phi[p] + s.eta[p];
    }
  return s;
}

ImmersionDefects immersion_defects(const Immersion& imm) {
  const ParamGrid& g = imm.grid;
  ImmersionDefects d;
  d.min_time = std::numeric_limits<double>::infinity();
  for (int j = 0; j < g.nv; ++j)
    for (int i = 0; i < g.nu; ++i) {
      const double u = g.u(i), v = g.v(j);
      const LorentzVector p = imm.phi(u, v), e = imm.normal(u, v);
      const LorentzVector pu = imm.phi_u(u, v), pv = imm.phi_v(u, v);
      const LorentzVector q = p + e;
      d.hyperboloid = std::max(d.hyperboloid, std::abs(minkowski(p, p) + 1.0));
      d.unit_normal = std::max(d.unit_normal, std::abs(minkowski(e, e) - 1.0));
      d.orthogonal = std::max(d.orthogonal, std::abs(minkowski(e, p)));
      d.tangent = std::max({d.tangent, std::abs(minkowski(e, pu)), std::abs(minkowski(e, pv))});
      d.null_cone = std::max(d.null_cone, std::abs(minkowski(q, q)));
      d.min_time = std::min(d.min_time, p(3));
    }
  return d;
}

std::vector<LorentzVector> lightcone_map(const Immersion& imm) {
  const ParamGrid& g = imm.grid;
  std::vector<LorentzVector> psi(g.size());
  for (int j = 0; j < g.nv; ++j)
    for (int i = 0; i < g.nu; ++i) {
      const std::size_t p = g.index(i, j);
      psi[p] = imm.lightcone(g.u(i), g.v(j));
      if (!(psi[p](3) > 0.0)) {
        throw GeometryError(imm.name + ": light-cone map has t <= 0 at sample " + std::to_string(p) +
                            "; try the opposite orientation");
      }
    }
  return psi;
}

Eigen::Vector3d gauss_map(const LorentzVector& psi) { return psi.head<3>() / psi(3); }

AmbientForms ambient_forms(const Immersion& imm) {
  const ParamGrid& g = imm.grid;
  AmbientForms f;
  f.I.resize(g.size());
  f.II.resize(g.size());
  f.III.resize(g.size());
  f.kappa.resize(g.size());
  for (int j = 0; j < g.nv; ++j)
    for (int i = 0; i < g.nu; ++i) {
      const double u = g.u(i), v = g.v(j);
      const std::size_t p = g.index(i, j);
      const LorentzVector e0 = imm.normal(u, v);
      const auto eta = [&imm, &e0](double a, double b) { return imm.normal_near(a, b, e0); };
      const LorentzVector pu = imm.phi_u(u, v), pv = imm.phi_v(u, v);
      const LorentzVector eu = diff(eta, u, v, g.du(), true, imm.fd_order);
      const LorentzVector ev = diff(eta, u, v, g.dv(), false, imm.fd_order);
      f.I[p] = gram(pu, pv, pu, pv);
      const Eigen::Matrix2d m = gram(pu, pv, eu, ev);
      f.II[p] = -0.5 * (m + m.transpose());
      f.III[p] = gram(eu, ev, eu, ev);
      f.kappa[p] = relative_eigenvalues(f.II[p], f.I[p], p);
    }
  return f;
}

std::vector<Eigen::Vector2d> principal_curvatures_ambient(const Immersion& imm) { return ambient_forms(imm).kappa; }

HoroPullback horospherical_pullback(const Immersion& imm, double degenerate_tol) {
  const ParamGrid& g = imm.grid;
  HoroPullback out;
  out.h.resize(g.size());
  out.degenerate.assign(g.size(), 0);
  for (int j = 0; j < g.nv; ++j)
    for (int i = 0; i < g.nu; ++i) {
      const double u = g.u(i), v = g.v(j);
      const std::size_t p = g.index(i, j);
      const LorentzVector e0 = imm.normal(u, v);
      const auto psi = [&imm, &e0](double a, double b) { return LorentzVector(imm.phi(a, b) + imm.normal_near(a, b, e0)); };
      const LorentzVector qu = diff(psi, u, v, g.du(), true, imm.fd_order);
      const LorentzVector qv = diff(psi, u, v, g.dv(), false, imm.fd_order);
      out.h[p] = gram(qu, qv, qu, qv);
      const LorentzVector pu = imm.phi_u(u, v), pv = imm.phi_v(u, v);
      const Eigen::Vector2d mu = relative_eigenvalues(out.h[p], gram(pu, pv, pu, pv), p);
      if (mu.minCoeff() < degenerate_tol) {
        out.degenerate[p] = 1;
        out.any_degenerate = true;
      }
    }
  return out;
}

bool is_horospherically_convex(const Eigen::Vector2d& kappa) {
  return (kappa.array() < 1.0).all() || (kappa.array() > 1.0).all();
}

std::vector<char> is_horospherically_convex(const std::vector<Eigen::Vector2d>& kappa) {
  std::vector<char> out(kappa.size());
  for (std::size_t p = 0; p < kappa.size(); ++p) out[p] = is_horospherically_convex(kappa[p]) ? 1 : 0;
  return out;
}

double geodesic_defining_function(double x_norm) { return 2.0 / (x_norm + std::sqrt(1.0 + x_norm * x_norm)); }

void write_immersion_csv(std::ostream& os, const Immersion& imm, const ImmersionSamples& s,
                         const std::vector<Eigen::Vector2d>& kappa, int stride) {
  const ParamGrid& g = imm.grid;
  stride = std::max(stride, 1);
  os << "u,v,phi_x1,phi_x2,phi_x3,phi_t,eta_x1,eta_x2,eta_x3,eta_t,psi_x1,psi_x2,psi_x3,psi_t,kappa_1,kappa_2\n";
  os.precision(17);
  for (int j = 0; j < g.nv; j += stride)
    for (int i = 0; i < g.nu; i += stride) {
      const std::size_t p = g.index(i, j);
      os << g.u(i) << ',' << g.v(j);
      for (const auto* vec : {&s.phi[p], &s.eta[p], &s.psi[p]})
        for (int c = 0; c < 4; ++c) os << ',' << (*vec)(c);
      os << ',' << kappa[p](0) << ',' << kappa[p](1) << '\n';
    }
}

}  // namespace hypfol
