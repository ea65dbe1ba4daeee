#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hypfol/metric_spec.hpp"
#include "hypfol/tensor_core.hpp"
#include "json.hpp"

namespace hypfol::cli {

/// One verified quantity. `Max` checks pass when value < tol, `Min` checks
/// (convergence orders, negative controls) when value > tol. Warn checks
/// are reported but do not affect the exit code.
struct Check {
  enum class Kind { Max, Min };
  std::string name;
  double value = 0.0;
  double tol = 0.0;
  Kind kind = Kind::Max;
  bool warn = false;
  bool pass = false;
  std::string note;
};

class Report {
 public:
  explicit Report(std::string command = {}) : command_(std::move(command)) {}

  Check& add(std::string name, double value, double tol, Check::Kind kind = Check::Kind::Max, bool warn = false,
             std::string note = {});
  Check& warn(std::string name, double value, double tol, std::string note = {});
  void merge(const Report& other);

  const std::string& command() const { return command_; }
  const std::vector<Check>& checks() const { return checks_; }
  const Check* find(const std::string& name) const;
  /// True when every non-warn check passes.
  bool ok() const;

  nlohmann::json info = nlohmann::json::object();
  double wall_time = 0.0;
  std::uint64_t seed = 42;

  nlohmann::json to_json() const;
  void print(std::ostream& os) const;

 private:
  std::string command_;
  std::vector<Check> checks_;
};

enum class Format { Csv, Json };

/// Tabular output written as CSV (header line, %.17g numbers) or JSON
/// (array of row objects).
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Everything a subcommand needs; built from flags and an optional
/// experiment config file.
struct Context {
  std::optional<MetricSpec> spec;
  std::string spec_label;
  nlohmann::json params = nlohmann::json::object();
  std::filesystem::path out_dir;
  Format format = Format::Csv;
  std::uint64_t seed = 42;
  std::map<std::string, double> tol_overrides;
  DerivativeSource derivatives = DerivativeSource::Auto;
  /// Cap on points written per table and spot-checked per invariant.
  std::size_t max_points = 2048;

  double tol(const std::string& name, double fallback) const;
  const MetricSpec& require_spec() const;
  /// Writes `t` as out_dir/stem.{csv,json}; no-op without an output directory.
  void write(const std::string& stem, const Table& t) const;
};

Report cmd_curvature(const Context& ctx);
Report cmd_foliate(const Context& ctx);
Report cmd_yamabe(const Context& ctx);
Report cmd_sigmak(const Context& ctx);
Report cmd_hyperboloid(const Context& ctx);
Report cmd_verify(const Context& ctx);

/// Entry point of the `hypfol` binary. Returns 0 when every non-warn check
/// passes, 1 on a failed check, 2 on invalid input.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hypfol::cli
