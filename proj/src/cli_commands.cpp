#include <algorithm>
#include <chrono>
#include <cmath>
#include <iterator>
#include <limits>
#include <numbers>
#include <random>

#include "hypfol/cli.hpp"
#include "hypfol/conformal.hpp"
#include "hypfol/error.hpp"
#include "hypfol/hyperboloid.hpp"
#include "hypfol/normal_form.hpp"
#include "hypfol/sigma_k.hpp"

namespace hypfol::cli {

using nlohmann::json;
using Kind = Check::Kind;

namespace {

constexpr double kExact = std::numeric_limits<double>::denorm_min();

template <class T>
T param(const json& p, const char* key, T fallback) {
  return p.contains(key) ? p.at(key).get<T>() : fallback;
}

std::vector<double> positive_ascending(const json& p, const char* key, std::vector<double> fallback) {
  std::vector<double> v = p.contains(key) ? p.at(key).get<std::vector<double>>() : std::move(fallback);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0) || (i > 0 && !(v[i] > v[i - 1]))) {
      throw SpecError(std::string("\"") + key + "\" must be positive and strictly ascending");
    }
  }
  return v;
}

std::string tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::vector<std::size_t> sample_points(const Chart& chart, const Validity& v, std::size_t cap, std::uint64_t seed) {
  std::vector<std::size_t> all;
  for_each_valid(chart, v, [&](std::size_t p, auto) { all.push_back(p); });
  if (all.size() <= cap) return all;
  std::vector<std::size_t> out;
  std::mt19937_64 rng(seed);
  std::sample(all.begin(), all.end(), std::back_inserter(out), cap, rng);
  return out;
}

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

/// Boundary data shared by the curvature-based commands.
struct Boundary {
  SampledMetric m;
  bool analytic = false;
  SymTensorField ric;
  ScalarField R;
  std::optional<SymTensorField> P;
  std::optional<SpectralField> spectral;

  int n() const { return m.n(); }
};

Boundary prepare(SampledMetric m, DerivativeSource src) {
  Boundary b;
  b.analytic = src == DerivativeSource::Auto && m.d1 && m.d2;
  auto rs = ricci_and_scalar(m, src);
  b.ric = std::move(rs.first);
  b.R = std::move(rs.second);
  if (m.n() >= 3) {
    b.P = schouten(m.gamma, b.ric, b.R);
    b.spectral = eigen_rel(m.gamma, *b.P);
  }
  b.m = std::move(m);
  return b;
}

Boundary prepare(const Context& ctx) { return prepare(materialize(ctx.require_spec()), ctx.derivatives); }

Boundary require_schouten(const Context& ctx) {
  Boundary b = prepare(ctx);
  if (!b.P) throw SpecError("n = 2: the Schouten tensor is not determined; use the library check_p2 diagnostic");
  return b;
}

CurvatureInvariants spot_invariants(const SampledMetric& m, DerivativeSource src, const std::vector<std::size_t>& pts) {
  const int n = m.n();
  const PairTable pairs(n);
  MetricJet jet;
  PointCurvature pc;
  CurvatureInvariants inv;
  std::vector<int> idx(n);
  for (std::size_t p : pts) {
    m.chart().unravel(p, idx);
    metric_jet(m, p, idx, src, jet, true);
    curvature_at(jet, pairs, pc, true);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            const double r = pc.R(pairs, i, j, k, l);
            inv.antisymmetry = std::max({inv.antisymmetry, std::abs(r + pc.R(pairs, j, i, k, l)),
                                         std::abs(r + pc.R(pairs, i, j, l, k))});
            inv.pair_symmetry = std::max(inv.pair_symmetry, std::abs(r - pc.R(pairs, k, l, i, j)));
            inv.bianchi = std::max(inv.bianchi, std::abs(r + pc.R(pairs, i, k, l, j) + pc.R(pairs, i, l, j, k)));
          }
    inv.ricci_trace = std::max(inv.ricci_trace, std::abs(pc.ginv.cwiseProduct(pc.ricci).sum() - pc.scalar));
  }
  return inv;
}

/// Eigen reconstruction, frame orthonormality and trace identity.
void spectral_checks(const Context& ctx, const Boundary& b, Report& rep) {
  const int n = b.n();
  double recon = 0.0, ortho = 0.0, trace = 0.0;
  bool sorted = true;
  for_each_valid(b.m.chart(), b.spectral->validity(), [&](std::size_t p, auto) {
    const Mat g = b.m.gamma.matrix(p);
    const Mat P = b.P->matrix(p);
    const Vec lam = b.spectral->eigenvalues(p);
    const Mat V = b.spectral->eigenvectors(p);
    const Mat rebuilt = g * V * lam.asDiagonal() * V.transpose() * g;
    recon = std::max(recon, max_abs(rebuilt - P) / std::max(1.0, max_abs(P)));
    ortho = std::max(ortho, max_abs(V.transpose() * g * V - Mat::Identity(n, n)));
    trace = std::max(trace, std::abs(lam.sum() - b.R[p] / (2.0 * (n - 1))) / std::max(1.0, std::abs(b.R[p])));
    for (int i = 1; i < n; ++i) sorted = sorted && lam(i - 1) <= lam(i);
  });
  rep.add("eigen_reconstruction", recon, ctx.tol("eigen_reconstruction", 1e-10));
  rep.add("eigen_orthonormality", ortho, ctx.tol("eigen_orthonormality", 1e-10));
  rep.add("eigen_sorted", sorted ? 0.0 : 1.0, 0.5);
  rep.add("trace_identity", trace, ctx.tol("trace_identity", 1e-10));
}

/// Foliation quantities at one r, accumulated into `acc` (max per check).
struct FoliationAccumulator {
  std::map<std::string, double> max;
  void put(const std::string& k, double v) {
    auto [it, fresh] = max.emplace(k, v);
    if (!fresh) it->second = std::max(it->second, v);
  }
};

void foliate_at(const Context& ctx, const Boundary& b, const FGExpansion& e, double r,
                const std::vector<std::size_t>& pts, FoliationAccumulator& acc, Table* table) {
  const int n = b.n();
  const LevelSetGeometry geom = fundamental_forms(e, r);
  const Weingarten w = weingarten(geom);
  const VecField radii = curvature_radii(w.kappa);
  const VecField key = key_identity_residual(r, *b.spectral, w.kappa);
  const VecField key_closed = key_identity_closed_form_residual(r, *b.spectral);
  const HorosphericalMetric horo = horospherical_metric(e, geom);

  double key_max = 0.0, closed_max = 0.0, kappa_dev = 0.0;
  for_each_valid(e.chart(), key.validity(), [&](std::size_t p, auto) {
    for (int i = 0; i < n; ++i) {
      key_max = std::max(key_max, key.get(p, i));
      closed_max = std::max(closed_max, key_closed.get(p, i));
      const double kc = kappa_closed_form(r, b.spectral->lambda(p, i));
      const double kg = w.kappa.get(p, n - 1 - i);
      kappa_dev = std::max(kappa_dev, std::abs(kg - kc) / std::max(1.0, std::abs(kc)));
    }
  });
  acc.put("key_identity", key_max);
  acc.put("key_identity_closed_form", closed_max);
  acc.put("weingarten_closed_form", kappa_dev);
  acc.put("horospherical", horo.residual);
  acc.put("scalar_correspondence", sup_norm(scalar_correspondence_residual(radii, b.R, r)));

  double S = 0.0;
  std::size_t count = 0;
  for_each_valid(b.m.chart(), b.R.validity(), [&](std::size_t p, auto) {
    S += b.R[p];
    ++count;
  });
  S /= std::max<std::size_t>(count, 1);
  try {
    acc.put("mean_radii", mean_radii_check(radii, b.R, S, r, ctx.tol("mean_radii_constancy", 1e-9)));
  } catch (const GeometryError&) {
    acc.put("mean_radii_skipped", 1.0);
  }

  if (table == nullptr) return;
  for (std::size_t p : pts) {
    const double hp = (horo.h.matrix(p) - (4.0 / (r * r)) * e.gamma.matrix(p)).cwiseAbs().maxCoeff();
    for (int i = 0; i < n; ++i) {
      table->rows.push_back({r, static_cast<double>(p), static_cast<double>(i + 1), b.spectral->lambda(p, i),
                             w.kappa.get(p, n - 1 - i), radii.get(p, n - 1 - i), key.get(p, i), hp});
    }
  }
}

void foliation_checks(const Context& ctx, const Boundary& b, const FoliationAccumulator& acc, Report& rep) {
  const double fd_tol = b.analytic ? 1e-10 : 1e-6;
  const auto get = [&](const char* k) { return acc.max.count(k) ? acc.max.at(k) : 0.0; };
  rep.add("key_identity", get("key_identity"), ctx.tol("key_identity", fd_tol));
  rep.add("key_identity_closed_form", get("key_identity_closed_form"), ctx.tol("key_identity_closed_form", 1e-12));
  rep.add("weingarten_closed_form", get("weingarten_closed_form"), ctx.tol("weingarten_closed_form", 1e-10));
  rep.add("horospherical", get("horospherical"), ctx.tol("horospherical", 1e-12));
  rep.add("scalar_correspondence", get("scalar_correspondence"), ctx.tol("scalar_correspondence", fd_tol));
  if (acc.max.count("mean_radii")) {
    rep.add("mean_radii", get("mean_radii"), ctx.tol("mean_radii", 1e-10));
  } else {
    rep.warn("mean_radii", std::numeric_limits<double>::quiet_NaN(), ctx.tol("mean_radii", 1e-10),
             "scalar curvature not constant; run yamabe first");
  }
}

void ambient_checks(const Context& ctx, const FGExpansion& e, Report& rep) {
  const AmbientResidual a = ambient_expansion_check(e);
  rep.add("ambient_first", a.first, ctx.tol("ambient_first", kExact));
  rep.add("ambient_second", a.second, ctx.tol("ambient_second", kExact));
  rep.add("ambient_third", a.third, ctx.tol("ambient_third", kExact));
}

double convergence_order(double coarse, double fine) { return std::log2(coarse / fine); }

template <class F>
double timed(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Report cmd_curvature(const Context& ctx) {
  Report rep("curvature");
  rep.wall_time = timed([&] {
    const Boundary b = prepare(ctx);
    const int n = b.n();
    const MetricSpec& spec = ctx.require_spec();
    rep.info["analytic_derivatives"] = b.analytic;
    rep.info["n"] = n;

    const auto pts = sample_points(b.m.chart(), b.R.validity(), ctx.max_points, ctx.seed);
    const CurvatureInvariants inv = spot_invariants(b.m, ctx.derivatives, pts);
    const double inv_tol = ctx.tol("curvature_invariants", 1e-9);
    rep.add("riemann_antisymmetry", inv.antisymmetry, inv_tol);
    rep.add("riemann_pair_symmetry", inv.pair_symmetry, inv_tol);
    rep.add("riemann_bianchi", inv.bianchi, inv_tol);
    rep.add("ricci_trace", inv.ricci_trace, inv_tol);

    if (spec.builtin == BuiltinMetric::FlatTorus) {
      double z = 0.0;
      for_each_valid(b.m.chart(), b.R.validity(), [&](std::size_t p, auto) {
        z = std::max({z, std::abs(b.R[p]), max_abs(b.ric.matrix(p))});
      });
      rep.add("flat_curvature", z, ctx.tol("flat_curvature", 1e-12));
    }
    if (b.P) {
      spectral_checks(ctx, b, rep);
      if (spec.builtin == BuiltinMetric::RoundSphereStereographic) {
        double d = 0.0;
        for_each_valid(b.m.chart(), b.P->validity(), [&](std::size_t p, auto) {
          d = std::max(d, max_abs(b.P->matrix(p) - 0.5 * b.m.gamma.matrix(p)));
        });
        rep.add("schouten_half_gamma", d, ctx.tol("schouten_half_gamma", 1e-6));
      }
    } else {
      rep.info["schouten"] = "not defined for n = 2";
    }

    Table t;
    t.header = {"point-index"};
    for (int a = 1; a <= n; ++a) t.header.push_back("x" + std::to_string(a));
    t.header.push_back("R");
    for (int i = 1; i <= n; ++i)
      for (int j = i; j <= n; ++j) t.header.push_back("Ric_" + std::to_string(i) + std::to_string(j));
    if (b.P) {
      for (int i = 1; i <= n; ++i)
        for (int j = i; j <= n; ++j) t.header.push_back("P_" + std::to_string(i) + std::to_string(j));
      for (int i = 1; i <= n; ++i) t.header.push_back("lambda_" + std::to_string(i));
    }
    std::vector<double> x(n);
    for (std::size_t p : pts) {
      std::vector<double> row{static_cast<double>(p)};
      b.m.chart().coords(p, x);
      row.insert(row.end(), x.begin(), x.end());
      row.push_back(b.R[p]);
      for (double v : b.ric.at(p)) row.push_back(v);
      if (b.P) {
        for (double v : b.P->at(p)) row.push_back(v);
        for (int i = 0; i < n; ++i) row.push_back(b.spectral->lambda(p, i));
      }
      t.rows.push_back(std::move(row));
    }
    ctx.write("curvature", t);
  });
  return rep;
}

Report cmd_foliate(const Context& ctx) {
  Report rep("foliate");
  rep.wall_time = timed([&] {
    const Boundary b = require_schouten(ctx);
    const FGExpansion e = build_expansion(b.m.gamma, *b.P);
    const auto rs = positive_ascending(ctx.params, "r", {0.1, 0.5, 1.0});
    const double rmax = e.r_max();
    rep.info["r_max"] = std::isfinite(rmax) ? json(rmax) : json("inf");
    rep.info["analytic_derivatives"] = b.analytic;

    const auto pts = sample_points(b.m.chart(), b.spectral->validity(), ctx.max_points, ctx.seed);
    Table t{{"r", "point-index", "i", "lambda_i", "kappa_i", "radius_i", "key_residual", "horo_residual"}, {}};
    FoliationAccumulator acc;
    for (double r : rs) {
      try {
        foliate_at(ctx, b, e, r, pts, acc, &t);
      } catch (const GeometryError& err) {
        rep.warn("r_range_" + tag(r), r, rmax, err.what());
      }
    }
    foliation_checks(ctx, b, acc, rep);
    ambient_checks(ctx, e, rep);

    if (ctx.params.contains("bulk_r0")) {
      const double r0 = ctx.params.at("bulk_r0").get<double>();
      const BulkResidual br = bulk_curvature_residual(e, r0);
      rep.add("bulk_curvature", br.sup, ctx.tol("bulk_curvature", 1e-5));
      rep.info["bulk_delta"] = br.delta;
    }
    if (ctx.params.contains("tangential_r")) {
      const double r = ctx.params.at("tangential_r").get<double>();
      rep.warn("tangential_decomposition", sup_norm(tangential_decomposition_residual(e, r)),
               ctx.tol("tangential_decomposition", 1e-5), "diagnostic; exact only for conformally flat input");
    }
    ctx.write("foliation", t);
  });
  return rep;
}

Report cmd_yamabe(const Context& ctx) {
  Report rep("yamabe");
  rep.wall_time = timed([&] {
    const SampledMetric m = materialize(ctx.require_spec());
    if (m.n() < 3) throw SpecError("yamabe flow needs n >= 3");
    YamabeConfig cfg;
    cfg.max_steps = param(ctx.params, "max_steps", cfg.max_steps);
    cfg.dt_factor = param(ctx.params, "dt_factor", cfg.dt_factor);
    cfg.tol = param(ctx.params, "tol", cfg.tol);
    const ChristoffelField G = christoffel(m, ctx.derivatives);
    const ScalarField R = ricci_and_scalar(m, ctx.derivatives).second;
    const YamabeResult res = yamabe_flow(m, G, R, cfg);
    const YamabeReport& yr = res.report;

    const bool expect_fail = param(ctx.params, "expect_nonconvergence", false);
    rep.add("yamabe_residual", yr.residual, cfg.tol, Kind::Max, expect_fail, yr.diagnostic);
    double rise = 0.0;
    for (std::size_t s = static_cast<std::size_t>(cfg.transient) + 1; s < yr.residual_history.size(); ++s) {
      rise = std::max(rise, yr.residual_history[s] - yr.residual_history[s - 1]);
    }
    rep.add("yamabe_monotone_after_transient", rise, ctx.tol("yamabe_monotone_after_transient", kExact), Kind::Max,
            expect_fail);
    rep.add("yamabe_volume_drift", yr.max_volume_drift, ctx.tol("yamabe_volume_drift", 1e-3));
    if (ctx.params.contains("expected_mean_R")) {
      const double want = ctx.params.at("expected_mean_R").get<double>();
      rep.add("yamabe_mean_R", std::abs(yr.mean_R - want), ctx.tol("yamabe_mean_R", 1e-3));
    }
    rep.info["steps"] = yr.steps;
    rep.info["dt"] = yr.dt;
    rep.info["mean_R"] = yr.mean_R;
    rep.info["converged"] = yr.converged;
    rep.info["aborted"] = yr.aborted;

    Table t{{"step", "residual", "mean R"}, {}};
    for (std::size_t s = 0; s < yr.residual_history.size(); ++s) {
      t.rows.push_back({static_cast<double>(s), yr.residual_history[s], yr.mean_history[s]});
    }
    ctx.write("yamabe", t);
  });
  return rep;
}

Report cmd_sigmak(const Context& ctx) {
  Report rep("sigmak");
  rep.wall_time = timed([&] {
    const Boundary b0 = require_schouten(ctx);
    const int n = b0.n();
    std::vector<int> ks;
    if (ctx.params.contains("k")) {
      ks = ctx.params.at("k").get<std::vector<int>>();
    } else {
      for (int k = 1; k <= n; ++k) ks.push_back(k);
    }
    const auto rs = positive_ascending(ctx.params, "r", {0.5, 1.0});
    const std::string mode = ctx.params.contains("normalize") && ctx.params.at("normalize").is_boolean()
                                 ? (ctx.params.at("normalize").get<bool>() ? "always" : "never")
                                 : param<std::string>(ctx.params, "normalize", "auto");

    Table t{{"r", "k", "point-index", "sigma_k", "in_gamma_k", "F_k", "abs_residual", "sign"}, {}};
    for (int k : ks) {
      if (k < 1 || k > n) throw SpecError("k = " + std::to_string(k) + " outside [1, n]");
      const std::string kt = "_k" + std::to_string(k);
      std::optional<Boundary> scaled_b;
      bool normalized = false;
      if (mode != "never") {
        try {
          const SigmaNormalization s = normalize_sigma_k(*b0.spectral, k);
          scaled_b = prepare(scaled(b0.m, s.c2), ctx.derivatives);
          normalized = true;
          rep.info["c2" + kt] = s.c2;
        } catch (const GeometryError& err) {
          if (mode == "always") throw;
          rep.warn("normalize" + kt, std::numeric_limits<double>::quiet_NaN(), 0.0, err.what());
        }
      }
      const Boundary& b = normalized ? *scaled_b : b0;
      const FGExpansion e = build_expansion(b.m.gamma, *b.P);
      const auto pts = sample_points(b.m.chart(), b.spectral->validity(), ctx.max_points, ctx.seed);

      double ident = 0.0, mag = 0.0, sign_dev = 0.0;
      std::vector<double> lam(n);
      for (double r : rs) {
        const Weingarten w = weingarten(fundamental_forms(e, r));
        const FoliationFunctional F = foliation_functional(w.kappa, k, r);
        const double expect_sign = (k % 2 == 0) ? 1.0 : -1.0;
        for_each_valid(e.chart(), F.F.validity(), [&](std::size_t p, auto) {
          for (int i = 0; i < n; ++i) lam[i] = b.spectral->lambda(p, i);
          const double pred = std::pow(-0.5 * r * r, k) * sigma(lam, k);
          ident = std::max(ident, std::abs(F.F[p] - pred) / std::max(1.0, std::abs(pred)));
          mag = std::max(mag, F.abs_residual[p]);
          sign_dev = std::max(sign_dev, std::abs(F.sign[p] - expect_sign));
        });
        for (std::size_t p : pts) {
          for (int i = 0; i < n; ++i) lam[i] = b.spectral->lambda(p, i);
          t.rows.push_back({r, static_cast<double>(k), static_cast<double>(p), sigma(lam, k),
                            in_gamma_k(lam, k) ? 1.0 : 0.0, F.F[p], F.abs_residual[p], F.sign[p]});
        }
      }
      rep.add("functional_identity" + kt, ident, ctx.tol("functional_identity", 1e-10));
      if (normalized) {
        rep.add("foliation_functional" + kt, mag, ctx.tol("foliation_functional", 1e-10));
        rep.add("foliation_sign" + kt, sign_dev, 0.5, Kind::Max, false,
                "sign(F_k) = (-1)^k; magnitude equals (r^2/2)^k");
      }
    }
    ctx.write("sigma_k", t);
  });
  return rep;
}

Report cmd_hyperboloid(const Context& ctx) {
  Report rep("hyperboloid");
  rep.wall_time = timed([&] {
    const json& p = ctx.params;
    const std::string surface = param<std::string>(p, "surface", "geodesic-sphere");
    const int grid = param(p, "grid", 64);
    const int order = param(p, "fd_order", 8);
    const std::string orient = param<std::string>(p, "orientation", surface == "horosphere" ? "inward" : "outward");
    if (orient != "outward" && orient != "inward") throw SpecError("orientation must be outward or inward");
    const Orientation o = orient == "outward" ? Orientation::Outward : Orientation::Inward;
    if (grid < 8) throw SpecError("grid must be at least 8");

    std::vector<std::pair<std::string, Immersion>> runs;
    if (surface == "geodesic-sphere") {
      for (double d : positive_ascending(p, "d", {0.5, 1.0, 2.0})) {
        runs.emplace_back("_d" + tag(d), geodesic_sphere(d, grid, grid, o));
      }
    } else if (surface == "horosphere") {
      runs.emplace_back("", horosphere(grid, param(p, "half_width", 1.0), o));
    } else if (surface == "totally-geodesic-plane") {
      runs.emplace_back("", totally_geodesic_plane(grid, param(p, "half_width", 1.0), o));
    } else if (surface == "geodesic-tube") {
      runs.emplace_back("", geodesic_tube(param(p, "rho", 0.5), grid, param(p, "half_width", 1.0), o));
    } else {
      throw SpecError("unknown surface \"" + surface + "\"");
    }

    const std::vector<double> ds = surface == "geodesic-sphere" ? positive_ascending(p, "d", {0.5, 1.0, 2.0})
                                                                : std::vector<double>{};
    for (std::size_t run = 0; run < runs.size(); ++run) {
      auto& [suffix, imm] = runs[run];
      imm.fd_order = order;
      const ImmersionDefects def = immersion_defects(imm);
      rep.add("hyperboloid_membership" + suffix, def.hyperboloid, ctx.tol("hyperboloid_membership", 1e-12));
      rep.add("normal_constraints" + suffix, std::max({def.unit_normal, def.orthogonal, def.tangent}),
              ctx.tol("normal_constraints", 1e-10));
      rep.add("null_cone" + suffix, def.null_cone, ctx.tol("null_cone", 1e-10));

      const AmbientForms f = ambient_forms(imm);
      const HoroPullback pb = horospherical_pullback(imm);
      const ImmersionSamples s = sample_immersion(imm);
      double vs_forms = 0.0;
      for (std::size_t q = 0; q < f.I.size(); ++q) {
        const double scale = std::max(1.0, pb.h[q].cwiseAbs().maxCoeff());
        vs_forms = std::max(vs_forms, (pb.h[q] - (f.I[q] - 2.0 * f.II[q] + f.III[q])).cwiseAbs().maxCoeff() / scale);
      }
      rep.add("pullback_vs_forms" + suffix, vs_forms, ctx.tol("pullback_vs_forms", 1e-8));
      const auto convex = is_horospherically_convex(f.kappa);
      const double convex_frac =
          static_cast<double>(std::count(convex.begin(), convex.end(), 1)) / static_cast<double>(convex.size());
      rep.info["convex_fraction" + suffix] = convex_frac;
      rep.info["degenerate_pullback" + suffix] = pb.any_degenerate;
      if (pb.any_degenerate) {
        rep.warn("degenerate_pullback" + suffix, 1.0, 0.5, "light-cone map is not an immersion here");
      }

      if (!ds.empty()) {
        const double d = ds[run];
        const double coth = 1.0 / std::tanh(d);
        const double want = o == Orientation::Outward ? -coth : coth;
        const double conf = std::exp(2.0 * d);
        double kerr = 0.0, herr = 0.0, gerr = 0.0;
        const ParamGrid& g = imm.grid;
        for (int j = 0; j < g.nv; ++j)
          for (int i = 0; i < g.nu; ++i) {
            const std::size_t q = g.index(i, j);
            const double th = g.u(i), ph = g.v(j);
            kerr = std::max(kerr, (f.kappa[q].array() - want).abs().maxCoeff());
            Eigen::Matrix2d g0;
            g0 << 1.0, 0.0, 0.0, std::sin(th) * std::sin(th);
            herr = std::max(herr, (pb.h[q] - conf * g0).cwiseAbs().maxCoeff());
            const Eigen::Vector3d w(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
            gerr = std::max(gerr, (gauss_map(s.psi[q]) - (o == Orientation::Outward ? w : Eigen::Vector3d(-w))).norm());
          }
        rep.add("kappa_coth" + suffix, kerr, ctx.tol("kappa_coth", 1e-6));
        rep.add("pullback_vs_conformal" + suffix, herr, ctx.tol("pullback_vs_conformal", 1e-8),
                Kind::Max, false, "against e^{2d} g_0 = 4 r^-2 g_0");
        rep.add("gauss_map" + suffix, gerr, ctx.tol("gauss_map", 1e-10));
        const double r = 2.0 * std::exp(-d);
        rep.add("kappa_closed_form" + suffix, std::abs(kappa_closed_form(r, 0.5) + coth) / coth,
                ctx.tol("kappa_closed_form", 1e-14));
        const double shift = 0.25;
        const Immersion far = geodesic_sphere(d + shift, g.nu, g.nv, o);
        const double sgn = o == Orientation::Outward ? 1.0 : -1.0;
        double par = 0.0;
        for (int j = 0; j < g.nv; j += 7)
          for (int i = 0; i < g.nu; i += 7) {
            const LorentzVector a = far.lightcone(g.u(i), g.v(j));
            const LorentzVector b = std::exp(sgn * shift) * imm.lightcone(g.u(i), g.v(j));
            par = std::max(par, (a - b).norm() / b.norm());
          }
        rep.add("parallel_horospheres" + suffix, par, ctx.tol("parallel_horospheres", 1e-10));
      }

      const int stride = std::max(1, grid / 64);
      Table t;
      t.header = {"u", "v", "phi_x1", "phi_x2", "phi_x3", "phi_t", "eta_x1", "eta_x2", "eta_x3", "eta_t",
                  "psi_x1", "psi_x2", "psi_x3", "psi_t", "kappa_1", "kappa_2"};
      const ParamGrid& g = imm.grid;
      for (int j = 0; j < g.nv; j += stride)
        for (int i = 0; i < g.nu; i += stride) {
          const std::size_t q = g.index(i, j);
          std::vector<double> row{g.u(i), g.v(j)};
          for (const auto* v : {&s.phi[q], &s.eta[q], &s.psi[q]})
            for (int c = 0; c < 4; ++c) row.push_back((*v)(c));
          row.push_back(f.kappa[q](0));
          row.push_back(f.kappa[q](1));
          t.rows.push_back(std::move(row));
        }
      ctx.write("immersion_" + surface + suffix, t);
    }
  });
  return rep;
}

Report cmd_verify(const Context& ctx) {
  Report rep("verify");
  rep.wall_time = timed([&] {
    Context sub = ctx;
    sub.out_dir.clear();
    if (!sub.spec) {
      sub.spec = MetricSpec::round_sphere(3, 32);
      rep.info["spec"] = "round-sphere-stereographic n=3 resolution 32 (default)";
    }
    rep.merge(cmd_curvature(sub));
    if (sub.spec->n >= 3) {
      rep.merge(cmd_foliate(sub));
      Context sk = sub;
      sk.params = json{{"r", json::array({0.5, 1.0})}};
      rep.merge(cmd_sigmak(sk));
    }

    // Convergence of the curvature engine under grid doubling.
    std::vector<double> ric_err;
    for (int N : {32, 64}) {
      const SampledMetric m = materialize(MetricSpec::round_sphere(3, N));
      const auto rs = ricci_and_scalar(m, DerivativeSource::FiniteDifference);
      double e = 0.0;
      for_each_valid(m.chart(), rs.first.validity(), [&](std::size_t p, auto) {
        e = std::max(e, max_abs(rs.first.matrix(p) - 2.0 * m.gamma.matrix(p)));
      });
      ric_err.push_back(e);
    }
    rep.add("ricci_convergence_order", convergence_order(ric_err[0], ric_err[1]),
            ctx.tol("ricci_convergence_order", 3.5), Kind::Min);

    // Bulk hyperbolicity of the normal form and its refinement.
    const double r0 = param(ctx.params, "bulk_r0", 0.2);
    for (const char* which : {"round_sphere", "flat_torus"}) {
      std::vector<double> res;
      for (int N : {32, 64}) {
        const MetricSpec s = std::string(which) == "round_sphere" ? MetricSpec::round_sphere(3, N)
                                                                  : MetricSpec::flat_torus(3, N);
        const Boundary b = prepare(materialize(s), DerivativeSource::Auto);
        res.push_back(bulk_curvature_residual(build_expansion(b.m.gamma, *b.P), r0).sup);
      }
      rep.add(std::string("bulk_") + which, res[1], ctx.tol("bulk_curvature", 1e-5));
      rep.add(std::string("bulk_refinement_") + which, res[0] / res[1], ctx.tol("bulk_refinement", 10.0), Kind::Min);
    }
    {
      const Boundary b = prepare(materialize(MetricSpec::perturbed_torus(4, 16, 0.2, {0, 1, 0, 0})),
                                 DerivativeSource::Auto);
      rep.add("bulk_negative_control", bulk_curvature_residual(build_expansion(b.m.gamma, *b.P), 1.0).sup,
              ctx.tol("bulk_negative_control", 1e-2), Kind::Min, true,
              "n = 4 perturbed torus is not locally conformally flat");
    }
  });
  return rep;
}

}  // namespace hypfol::cli
