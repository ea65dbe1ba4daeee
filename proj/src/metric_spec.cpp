#include "hypfol/metric_spec.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>

#include "hypfol/error.hpp"

namespace hypfol {

using nlohmann::json;

std::string_view to_string(BuiltinMetric b) {
  switch (b) {
    case BuiltinMetric::FlatTorus: return "flat-torus";
    case BuiltinMetric::PerturbedTorus: return "perturbed-torus";
    case BuiltinMetric::RoundSphereStereographic: return "round-sphere-stereographic";
  }
  return "?";
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

BuiltinMetric parse_builtin(const std::string& s) {
  if (s == "flat-torus") return BuiltinMetric::FlatTorus;
  if (s == "perturbed-torus") return BuiltinMetric::PerturbedTorus;
  if (s == "round-sphere-stereographic") return BuiltinMetric::RoundSphereStereographic;
  throw SpecError("unknown builtin metric '" + s + "'");
}

std::vector<Expression> parse_list(const json& arr, std::size_t expected, int n, const char* key) {
  if (!arr.is_array()) throw SpecError(std::string("\"") + key + "\" must be an array of strings");
  if (arr.size() != expected) {
    throw SpecError(std::string("\"") + key + "\" needs " + std::to_string(expected) + " entries, got " +
                    std::to_string(arr.size()));
  }
  std::vector<Expression> out;
  out.reserve(expected);
  for (const auto& e : arr) {
    if (!e.is_string()) throw SpecError(std::string("\"") + key + "\" entries must be strings");
    out.push_back(parse_expression(e.get<std::string>(), n));
  }
  return out;
}

/// Pointwise closed form of a builtin metric and its derivatives.
/// dg has n*S entries, ddg S*S entries (packed as in SampledMetric).
using PointEval = std::function<void(std::span<const double> x, Mat& g, double* dg, double* ddg)>;

PointEval builtin_eval(const MetricSpec& spec) {
  const int n = spec.n;
  const int S = sym_size(n);
  switch (*spec.builtin) {
    case BuiltinMetric::FlatTorus:
      return [n, S](std::span<const double>, Mat& g, double* dg, double* ddg) {
        g = Mat::Identity(n, n);
        std::fill(dg, dg + n * S, 0.0);
        std::fill(ddg, ddg + S * S, 0.0);
      };
    case BuiltinMetric::PerturbedTorus: {
      const double eps = spec.epsilon;
      const std::vector<int> mode = spec.mode;
      return [n, S, eps, mode](std::span<const double> x, Mat& g, double* dg, double* ddg) {
        double phase = 0.0;
        for (int a = 0; a < n; ++a) phase += mode[a] * x[a];
        const double s = std::sin(phase), c = std::cos(phase);
        g = Mat::Identity(n, n);
        g(0, 0) += eps * s;
        std::fill(dg, dg + n * S, 0.0);
        std::fill(ddg, ddg + S * S, 0.0);
        for (int k = 0; k < n; ++k) {
          dg[k * S] = eps * mode[k] * c;
          for (int l = k; l < n; ++l) ddg[sym_index(k, l, n) * S] = -eps * mode[k] * mode[l] * s;
        }
      };
    }
    case BuiltinMetric::RoundSphereStereographic:
      return [n, S](std::span<const double> y, Mat& g, double* dg, double* ddg) {
        double r2 = 0.0;
        for (int a = 0; a < n; ++a) r2 += y[a] * y[a];
        const double q = 1.0 + r2;
        const double f = 4.0 / (q * q);
        g = f * Mat::Identity(n, n);
        std::fill(dg, dg + n * S, 0.0);
        std::fill(ddg, ddg + S * S, 0.0);
        for (int k = 0; k < n; ++k) {
          const double fk = -16.0 * y[k] / (q * q * q);
          for (int i = 0; i < n; ++i) dg[k * S + sym_index(i, i, n)] = fk;
          for (int l = k; l < n; ++l) {
            const double fkl = (k == l ? -16.0 / (q * q * q) : 0.0) + 96.0 * y[k] * y[l] / (q * q * q * q);
            for (int i = 0; i < n; ++i) ddg[sym_index(k, l, n) * S + sym_index(i, i, n)] = fkl;
          }
        }
      };
  }
  return {};
}

void check_expression_symmetry(const MetricSpec& spec) {
  const int n = spec.n;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (spec.components[i * n + j].to_string() != spec.components[j * n + i].to_string()) {
        throw SpecError("component matrix not symmetric: entries (" + std::to_string(i + 1) + "," +
                        std::to_string(j + 1) + ") and (" + std::to_string(j + 1) + "," + std::to_string(i + 1) +
                        ") differ");
      }
    }
  }
}

}  // namespace

void MetricSpec::validate() const {
  if (n < 2 || n >= kMaxDim) throw SpecError("dimension n must satisfy 2 <= n <= " + std::to_string(kMaxDim - 1));
  if (static_cast<int>(axes.size()) != n) throw SpecError("chart needs one axis per dimension");
  for (const auto& ax : axes) {
    if (ax.resolution < 8) throw SpecError("resolution must be >= 8 on every axis");
    if (!(ax.hi > ax.lo)) throw SpecError("extent must be an increasing interval");
    if (ax.periodic != (topology == Topology::Periodic)) throw SpecError("axis topology disagrees with chart");
  }
  if (builtin) {
    switch (*builtin) {
      case BuiltinMetric::FlatTorus:
      case BuiltinMetric::PerturbedTorus:
        if (topology != Topology::Periodic) throw SpecError(std::string(to_string(*builtin)) + " needs a periodic chart");
        break;
      case BuiltinMetric::RoundSphereStereographic:
        if (topology != Topology::Open) throw SpecError("round-sphere-stereographic needs an open chart");
        break;
    }
    if (*builtin == BuiltinMetric::PerturbedTorus) {
      if (static_cast<int>(mode.size()) != n) throw SpecError("perturbed-torus mode needs n entries");
      for (int a = 0; a < n; ++a) {
        const double cycles = mode[a] * axes[a].length() / kTwoPi;
        if (std::abs(cycles - std::round(cycles)) > 1e-9) {
          throw SpecError("perturbed-torus mode is not periodic on the chart extent");
        }
      }
      if (!(std::abs(epsilon) < 1.0)) throw SpecError("perturbed-torus needs |epsilon| < 1");
    }
    return;
  }
  if (components.size() != static_cast<std::size_t>(n * n)) throw SpecError("metric needs n*n components");
  for (const auto& e : components) {
    if (e.max_variable() > n) throw SpecError("component uses a variable beyond x" + std::to_string(n));
  }
  check_expression_symmetry(*this);
  if (!d1.empty() && d1.size() != static_cast<std::size_t>(n * n * n)) throw SpecError("\"d1\" needs n^3 entries");
  if (!d2.empty() && d2.size() != static_cast<std::size_t>(n * n * n * n)) throw SpecError("\"d2\" needs n^4 entries");
}

MetricSpec MetricSpec::from_json(const json& j) {
  if (!j.is_object() || !j.contains("chart") || !j.contains("metric")) {
    throw SpecError("metric spec needs \"chart\" and \"metric\" objects");
  }
  const json& jc = j.at("chart");
  const json& jm = j.at("metric");
  MetricSpec s;
  try {
    s.n = jc.at("n").get<int>();
    s.topology = parse_topology(jc.at("topology").get<std::string>());
    if (s.n < 2 || s.n >= kMaxDim) throw SpecError("dimension n out of range");

    std::vector<std::pair<double, double>> extent(s.n);
    if (jc.contains("extent")) {
      const json& je = jc.at("extent");
      if (je.size() == 2 && je[0].is_number()) {
        for (auto& e : extent) e = {je[0].get<double>(), je[1].get<double>()};
      } else {
        if (je.size() != static_cast<std::size_t>(s.n)) throw SpecError("\"extent\" needs n intervals");
        for (int a = 0; a < s.n; ++a) extent[a] = {je[a].at(0).get<double>(), je[a].at(1).get<double>()};
      }
    } else {
      const bool sphere = jm.value("builtin", "") == "round-sphere-stereographic";
      for (auto& e : extent) e = sphere ? std::pair{-2.0, 2.0} : std::pair{0.0, kTwoPi};
    }
    std::vector<int> res(s.n);
    const json& jr = jc.at("resolution");
    if (jr.is_number_integer()) {
      std::fill(res.begin(), res.end(), jr.get<int>());
    } else {
      if (jr.size() != static_cast<std::size_t>(s.n)) throw SpecError("\"resolution\" needs n entries");
      for (int a = 0; a < s.n; ++a) res[a] = jr[a].get<int>();
    }
    for (int a = 0; a < s.n; ++a) {
      s.axes.push_back(Axis{extent[a].first, extent[a].second, res[a], s.topology == Topology::Periodic});
    }

    if (jm.contains("builtin")) {
      s.builtin = parse_builtin(jm.at("builtin").get<std::string>());
      const json params = jm.value("params", json::object());
      s.epsilon = params.value("epsilon", 0.05);
      if (params.contains("mode")) {
        s.mode = params.at("mode").get<std::vector<int>>();
      } else {
        s.mode.assign(s.n, 0);
        s.mode[0] = 1;
      }
    } else if (jm.contains("components")) {
      s.components = parse_list(jm.at("components"), static_cast<std::size_t>(s.n * s.n), s.n, "components");
      if (jm.contains("d1")) s.d1 = parse_list(jm.at("d1"), static_cast<std::size_t>(s.n * s.n * s.n), s.n, "d1");
      if (jm.contains("d2")) {
        s.d2 = parse_list(jm.at("d2"), static_cast<std::size_t>(s.n * s.n * s.n * s.n), s.n, "d2");
      }
    } else {
      throw SpecError("\"metric\" needs \"builtin\" or \"components\"");
    }
  } catch (const json::exception& e) {
    throw SpecError(std::string("malformed metric spec: ") + e.what());
  }
  s.validate();
  return s;
}

MetricSpec MetricSpec::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open metric spec " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SpecError("metric spec " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

MetricSpec MetricSpec::flat_torus(int n, int resolution) {
  MetricSpec s;
  s.n = n;
  s.topology = Topology::Periodic;
  s.axes.assign(n, Axis{0.0, kTwoPi, resolution, true});
  s.builtin = BuiltinMetric::FlatTorus;
  s.validate();
  return s;
}

MetricSpec MetricSpec::perturbed_torus(int n, int resolution, double epsilon, std::vector<int> mode) {
  MetricSpec s = flat_torus(n, resolution);
  s.builtin = BuiltinMetric::PerturbedTorus;
  s.epsilon = epsilon;
  s.mode = std::move(mode);
  s.validate();
  return s;
}

MetricSpec MetricSpec::round_sphere(int n, int resolution, double half_width) {
  MetricSpec s;
  s.n = n;
  s.topology = Topology::Open;
  s.axes.assign(n, Axis{-half_width, half_width, resolution, false});
  s.builtin = BuiltinMetric::RoundSphereStereographic;
  s.validate();
  return s;
}

MetricSpec MetricSpec::from_components(int n, Topology topology, double lo, double hi, int resolution,
                                       const std::vector<std::string>& comps) {
  json j;
  j["chart"] = {{"n", n}, {"topology", std::string(to_string(topology))}, {"extent", {lo, hi}}, {"resolution", resolution}};
  j["metric"] = {{"components", comps}};
  return from_json(j);
}

SampledMetric materialize(const MetricSpec& spec) {
  spec.validate();
  const Chart chart = spec.chart();
  const int n = spec.n;
  const int S = sym_size(n);

  SampledMetric out;
  out.gamma = SymTensorField(chart);
  const bool want_d1 = spec.builtin.has_value() || !spec.d1.empty();
  const bool want_d2 = spec.builtin.has_value() || !spec.d2.empty();
  if (want_d1) out.d1 = Field(chart, n * S, Validity::full(chart));
  if (want_d2) out.d2 = Field(chart, S * S, Validity::full(chart));

  PointEval eval;
  if (spec.builtin) {
    eval = builtin_eval(spec);
  } else {
    eval = [&spec, n, S](std::span<const double> x, Mat& g, double* dg, double* ddg) {
      g.resize(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = spec.components[i * n + j].evaluate(x);
      if (dg && !spec.d1.empty()) {
        for (int k = 0; k < n; ++k)
          for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) dg[k * S + sym_index(i, j, n)] = spec.d1[(k * n + i) * n + j].evaluate(x);
      }
      if (ddg && !spec.d2.empty()) {
        for (int k = 0; k < n; ++k)
          for (int l = k; l < n; ++l)
            for (int i = 0; i < n; ++i)
              for (int j = i; j < n; ++j)
                ddg[sym_index(k, l, n) * S + sym_index(i, j, n)] = spec.d2[((k * n + l) * n + i) * n + j].evaluate(x);
      }
    };
  }

  std::vector<double> x(n);
  std::vector<double> dg_scratch(n * S), ddg_scratch(S * S);
  Mat g(n, n);
  for (std::size_t p = 0; p < chart.size(); ++p) {
    chart.coords(p, x);
    double* dg = out.d1 ? out.d1->at(p).data() : dg_scratch.data();
    double* ddg = out.d2 ? out.d2->at(p).data() : ddg_scratch.data();
    eval(x, g, dg, ddg);
    out.gamma.set_checked(p, g);
    Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues()(0) > 0.0)) {
      throw GeometryError("metric not positive definite at point " + std::to_string(p) +
                          " (smallest eigenvalue " + std::to_string(es.eigenvalues()(0)) + ")");
    }
  }

  // Periodic charts identify x = hi with x = lo; sampled data must agree.
  if (!spec.builtin && spec.topology == Topology::Periodic) {
    std::vector<double> xa(n), xb(n);
    Mat ga(n, n), gb(n, n);
    for (std::size_t p = 0; p < chart.size(); p += std::max<std::size_t>(1, chart.size() / 64)) {
      chart.coords(p, xa);
      eval(xa, ga, nullptr, nullptr);
      for (int a = 0; a < n; ++a) {
        xb = xa;
        xb[a] = chart.axis(a).hi;
        xa[a] = chart.axis(a).lo;
        eval(xa, ga, nullptr, nullptr);
        eval(xb, gb, nullptr, nullptr);
        if ((ga - gb).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, ga.cwiseAbs().maxCoeff())) {
          throw SpecError("metric components are not periodic along axis " + std::to_string(a + 1));
        }
        chart.coords(p, xa);
      }
    }
  }
  return out;
}

SampledMetric from_samples(SymTensorField gamma) {
  SampledMetric m;
  m.gamma = std::move(gamma);
  return m;
}

SampledMetric scaled(const SampledMetric& m, double c2) {
  SampledMetric out = m;
  for (double& v : out.gamma.data()) v *= c2;
  if (out.d1) for (double& v : out.d1->data()) v *= c2;
  if (out.d2) for (double& v : out.d2->data()) v *= c2;
  return out;
}

}  // namespace hypfol
