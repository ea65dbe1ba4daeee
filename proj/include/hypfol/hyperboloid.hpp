#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace hypfol {

/// Point of Minkowski space R^{3,1} as (x1, x2, x3, t).
using LorentzVector = Eigen::Vector4d;

/// <u, v> = -t_u t_v + x_u . x_v
inline double minkowski(const LorentzVector& u, const LorentzVector& v) {
  return u.head<3>().dot(v.head<3>()) - u(3) * v(3);
}

enum class Orientation { Outward, Inward };

/// Cell-centred parameter grid: u_i = u_lo + (i + 1/2) du, likewise v.
/// The half-cell offset keeps latitude-longitude grids off the poles.
struct ParamGrid {
  int nu = 64;
  int nv = 64;
  double u_lo = 0.0, u_hi = 1.0;
  double v_lo = 0.0, v_hi = 1.0;

  double du() const { return (u_hi - u_lo) / nu; }
  double dv() const { return (v_hi - v_lo) / nv; }
  double u(int i) const { return u_lo + (i + 0.5) * du(); }
  double v(int j) const { return v_lo + (j + 0.5) * dv(); }
  std::size_t size() const { return static_cast<std::size_t>(nu) * nv; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nu + i; }
};

/// Parameterized surface in the hyperboloid {<x,x> = -1, t > 0} of R^{3,1}.
///
/// The de Sitter normal is not supplied: it is recovered at any parameter
/// from <eta, phi> = <eta, phi_u> = <eta, phi_v> = 0, <eta, eta> = 1, with
/// the sign chosen by `orientation`. `outward_sign` is the sign of
/// det[phi, phi_u, phi_v, eta] for the outward normal in this
/// parameterization.
struct Immersion {
  std::string name;
  ParamGrid grid;
  std::function<LorentzVector(double, double)> phi;
  Orientation orientation = Orientation::Outward;
  int outward_sign = -1;
  /// Order of the central difference stencils (4, 6 or 8).
  int fd_order = 8;


  LorentzVector position(double u, double v) const { return phi(u, v); }
  LorentzVector phi_u(double u, double v) const;
  LorentzVector phi_v(double u, double v) const;
  LorentzVector normal(double u, double v) const;
  /// Unit normal whose Euclidean dot product with `ref` is positive; used
  /// on stencil points, where the parameterization may change orientation
  /// (e.g. across a pole).
  LorentzVector normal_near(double u, double v, const LorentzVector& ref) const;
  /// psi = phi + eta.
  LorentzVector lightcone(double u, double v) const { return phi(u, v) + normal(u, v); }
};

/// phi(theta, varphi) = (sinh d omega, cosh d) on the unit sphere,
/// theta in (0, pi), varphi in [0, 2 pi).
Immersion geodesic_sphere(double d, int n_theta = 64, int n_phi = 64, Orientation o = Orientation::Outward);

/// Sphere-like surface phi = (sinh rho omega, cosh rho) with rho = rho(theta, varphi) > 0.
Immersion radial_graph(std::function<double(double, double)> rho, int n_theta = 64, int n_phi = 64,
                       Orientation o = Orientation::Outward);

/// Horosphere p(u,v) = (u, v, q/2, 1 + q/2), q = u^2 + v^2, on [-w, w]^2.
/// Its inward normal is (0,0,1,1) - p.
Immersion horosphere(int n = 64, double half_width = 1.0, Orientation o = Orientation::Inward);

/// Totally geodesic plane {x3 = 0}: p(u,v) = (sinh u, cosh u sinh v, 0, cosh u cosh v).
Immersion totally_geodesic_plane(int n = 64, double half_width = 1.0, Orientation o = Orientation::Outward);

/// Equidistant tube of radius rho around the geodesic (sinh s, 0, 0, cosh s):
/// p(s, theta) = (cosh rho sinh s, sinh rho cos theta, sinh rho sin theta, cosh rho cosh s).
Immersion geodesic_tube(double rho, int n = 64, double half_length = 1.0, Orientation o = Orientation::Outward);

/// Samples of phi, eta and psi = phi + eta on the grid, index j * nu + i.
struct ImmersionSamples {
  std::vector<LorentzVector> phi;
  std::vector<LorentzVector> eta;
  std::vector<LorentzVector> psi;
};

/// Throws GeometryError where <phi, phi> = -1, t > 0 fails (1e-12) or the
/// normal conditions fail (1e-10).
ImmersionSamples sample_immersion(const Immersion& imm);

/// Max violations of the hyperboloid and normal constraints over the grid.
struct ImmersionDefects {
  double hyperboloid = 0.0;   // |<phi,phi> + 1|
  double unit_normal = 0.0;   // |<eta,eta> - 1|
  double orthogonal = 0.0;    // |<eta,phi>|
  double tangent = 0.0;       // max |<eta, d phi>|
  double null_cone = 0.0;     // |<psi,psi>|
  double min_time = 0.0;      // min t_phi
};
ImmersionDefects immersion_defects(const Immersion& imm);

/// Light-cone map psi = phi + eta; throws GeometryError where t_psi <= 0.
std::vector<LorentzVector> lightcone_map(const Immersion& imm);

/// Hyperbolic Gauss map: spatial part of psi / t_psi.
Eigen::Vector3d gauss_map(const LorentzVector& psi);

/// First, second and third fundamental forms from differences of phi and
/// eta: I = <d phi, d phi>, II = -<d phi, d eta> (symmetrized),
/// III = <d eta, d eta>; kappa ascending from II v = kappa I v.
struct AmbientForms {
  std::vector<Eigen::Matrix2d> I;
  std::vector<Eigen::Matrix2d> II;
  std::vector<Eigen::Matrix2d> III;
  std::vector<Eigen::Vector2d> kappa;
};

AmbientForms ambient_forms(const Immersion& imm);
std::vector<Eigen::Vector2d> principal_curvatures_ambient(const Immersion& imm);

/// psi^* g_L from differences of psi. A point is degenerate when the
/// smallest eigenvalue of the pullback relative to I is below `degenerate_tol`.
struct HoroPullback {
  std::vector<Eigen::Matrix2d> h;
  std::vector<char> degenerate;
  bool any_degenerate = false;
};

HoroPullback horospherical_pullback(const Immersion& imm, double degenerate_tol = 1e-6);

/// All kappa_i < 1 or all kappa_i > 1.
bool is_horospherically_convex(const Eigen::Vector2d& kappa);
std::vector<char> is_horospherically_convex(const std::vector<Eigen::Vector2d>& kappa);

/// r = 2 / (|x| + sqrt(1 + |x|^2)) for the spatial norm |x| of a hyperboloid point.
double geodesic_defining_function(double x_norm);

/// Columns u,v then phi, eta, psi components and kappa_1, kappa_2; one row
/// per grid point, every `stride`-th point in each direction.
void write_immersion_csv(std::ostream& os, const Immersion& imm, const ImmersionSamples& s,
                         const std::vector<Eigen::Vector2d>& kappa, int stride = 1);

}  // namespace hypfol
