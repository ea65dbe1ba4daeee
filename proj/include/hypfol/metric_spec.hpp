#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hypfol/chart.hpp"
#include "hypfol/expression.hpp"
#include "hypfol/field.hpp"
#include "json.hpp"

namespace hypfol {

enum class BuiltinMetric { FlatTorus, PerturbedTorus, RoundSphereStereographic };

std::string_view to_string(BuiltinMetric b);

/// Declarative boundary metric: a chart plus either a builtin family or an
/// n x n matrix of component expressions, optionally with analytic
/// derivative expressions.
///
/// Builtins:
///   flat-torus                  gamma = delta on a periodic box
///   perturbed-torus(eps, mode)  gamma_11 = 1 + eps sin(mode . x), others delta
///   round-sphere-stereographic  gamma = 4 / (1 + |y|^2)^2 delta on an open box
///
/// Expression derivative layout: d1[(k n + i) n + j] = d_k gamma_ij and
/// d2[((k n + l) n + i) n + j] = d_k d_l gamma_ij.
struct MetricSpec {
  int n = 3;
  Topology topology = Topology::Periodic;
  std::vector<Axis> axes;

  std::optional<BuiltinMetric> builtin;
  double epsilon = 0.05;
  std::vector<int> mode;

  std::vector<Expression> components;
  std::vector<Expression> d1;
  std::vector<Expression> d2;

  Chart chart() const { return Chart(axes); }

  /// Schema and range checks; throws SpecError.
  void validate() const;

  static MetricSpec from_json(const nlohmann::json& j);
  static MetricSpec from_file(const std::filesystem::path& path);

  static MetricSpec flat_torus(int n, int resolution);
  static MetricSpec perturbed_torus(int n, int resolution, double epsilon, std::vector<int> mode);
  static MetricSpec round_sphere(int n, int resolution, double half_width = 2.0);
  /// Expression components on a uniform chart; `comps` is n x n row-major.
  static MetricSpec from_components(int n, Topology topology, double lo, double hi, int resolution,
                                    const std::vector<std::string>& comps);
};

/// A boundary metric sampled on its chart, with optional analytic
/// derivatives (packed: d1 index k*S + s(i,j), d2 index s(k,l)*S + s(i,j),
/// S = n(n+1)/2).
struct SampledMetric {
  SymTensorField gamma;
  std::optional<Field> d1;
  std::optional<Field> d2;

  const Chart& chart() const { return gamma.chart(); }
  int n() const { return gamma.n(); }
};

/// Samples the metric at every grid point and verifies symmetry and
/// positive definiteness (smallest eigenvalue > 0). Throws SpecError for
/// non-symmetric component matrices, GeometryError for non-positive-definite
/// samples, DomainError for evaluation failures.
SampledMetric materialize(const MetricSpec& spec);

/// Wraps an already sampled metric (no analytic derivatives).
SampledMetric from_samples(SymTensorField gamma);

/// Constant rescaling gamma -> c2 * gamma, derivatives included.
SampledMetric scaled(const SampledMetric& m, double c2);

}  // namespace hypfol
