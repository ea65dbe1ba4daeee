#include <fstream>
#include <functional>
#include <ostream>

#include "CLI11.hpp"
#include "hypfol/cli.hpp"
#include "hypfol/error.hpp"

namespace hypfol::cli {

using nlohmann::json;

namespace {

struct Options {
  std::string spec_path;
  std::string config_path;
  std::string out;
  std::string format;
  std::string derivatives = "auto";
  std::vector<std::string> tol_overrides;
  std::vector<std::string> params;
  std::vector<double> r_list;
  std::vector<int> k_list;
  std::vector<double> d_list;
  std::string surface;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_points;
};

std::pair<std::string, std::string> split_assignment(const std::string& s, const char* what) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw SpecError(std::string(what) + " expects NAME=VALUE, got \"" + s + "\"");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

json parse_value(const std::string& v) {
  try {
    return json::parse(v);
  } catch (const json::parse_error&) {
    return json(v);
  }
}

Format parse_format(const std::string& f) {
  if (f == "csv") return Format::Csv;
  if (f == "json") return Format::Json;
  throw SpecError("format must be csv or json, got \"" + f + "\"");
}

/// Config file first, then flags on top.
Context build_context(const std::string& command, const Options& o) {
  Context ctx;
  std::filesystem::path base;
  json cfg = json::object();
  if (!o.config_path.empty()) {
    std::ifstream is(o.config_path);
    if (!is) throw SpecError("cannot open config " + o.config_path);
    cfg = json::parse(is);
    if (!cfg.is_object()) throw SpecError("config must be a JSON object");
    base = std::filesystem::path(o.config_path).parent_path();
    if (cfg.contains("command") && cfg["command"].get<std::string>() != command) {
      throw SpecError("config is for command \"" + cfg["command"].get<std::string>() + "\"");
    }
    if (cfg.contains("spec")) {
      const json& s = cfg["spec"];
      if (s.is_string()) {
        ctx.spec = MetricSpec::from_file(base / s.get<std::string>());
        ctx.spec_label = s.get<std::string>();
      } else {
        ctx.spec = MetricSpec::from_json(s);
        ctx.spec_label = "inline";
      }
    }
    if (cfg.contains("params")) ctx.params = cfg["params"];
    if (cfg.contains("out")) ctx.out_dir = base / cfg["out"].get<std::string>();
    if (cfg.contains("format")) ctx.format = parse_format(cfg["format"].get<std::string>());
    if (cfg.contains("seed")) ctx.seed = cfg["seed"].get<std::uint64_t>();
    if (ctx.params.contains("tolerances")) {
      for (auto& [k, v] : ctx.params["tolerances"].items()) ctx.tol_overrides[k] = v.get<double>();
    }
  }

  if (!o.spec_path.empty()) {
    ctx.spec = MetricSpec::from_file(o.spec_path);
    ctx.spec_label = o.spec_path;
  }
  if (!o.out.empty()) ctx.out_dir = o.out;
  if (!o.format.empty()) ctx.format = parse_format(o.format);
  if (o.seed) ctx.seed = *o.seed;
  if (o.max_points) ctx.max_points = *o.max_points;
  if (o.derivatives == "fd") {
    ctx.derivatives = DerivativeSource::FiniteDifference;
  } else if (o.derivatives != "auto") {
    throw SpecError("--derivatives must be auto or fd");
  }
  for (const auto& t : o.tol_overrides) {
    auto [name, value] = split_assignment(t, "--tol-override");
    ctx.tol_overrides[name] = std::stod(value);
  }
  for (const auto& [name, tol] : ctx.tol_overrides) {
    if (!(tol > 0.0)) throw SpecError("tolerance \"" + name + "\" must be positive");
  }
  for (const auto& p : o.params) {
    auto [name, value] = split_assignment(p, "--param");
    ctx.params[name] = parse_value(value);
  }
  if (!o.r_list.empty()) ctx.params["r"] = o.r_list;
  if (!o.k_list.empty()) ctx.params["k"] = o.k_list;
  if (!o.d_list.empty()) ctx.params["d"] = o.d_list;
  if (!o.surface.empty()) ctx.params["surface"] = o.surface;
  return ctx;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app("Fefferman-Graham foliation and horospherical geometry toolkit", "hypfol");
  app.require_subcommand(1);
  Options o;

  using Command = std::function<Report(const Context&)>;
  const std::vector<std::tuple<const char*, const char*, Command>> commands = {
      {"curvature", "Ricci, scalar and Schouten fields with invariant checks", cmd_curvature},
      {"foliate", "Level-set geometry of the normal-form foliation", cmd_foliate},
      {"yamabe", "Normalized Yamabe flow to constant scalar curvature", cmd_yamabe},
      {"sigmak", "sigma_k curvature and the foliation functional", cmd_sigmak},
      {"hyperboloid", "Surfaces in the hyperboloid model and their light-cone maps", cmd_hyperboloid},
      {"verify", "Full identity suite with convergence orders", cmd_verify},
  };
  std::vector<std::pair<CLI::App*, Command>> subs;
  for (const auto& [name, help, fn] : commands) {
    CLI::App* s = app.add_subcommand(name, help);
    s->add_option("--spec", o.spec_path, "Metric spec JSON");
    s->add_option("--config", o.config_path, "Experiment config JSON");
    s->add_option("--out", o.out, "Output directory");
    s->add_option("--format", o.format, "csv or json");
    s->add_option("--seed", o.seed, "Seed for sampled spot checks (default 42)");
    s->add_option("--tol-override", o.tol_overrides, "NAME=VALUE")->allow_extra_args(false);
    s->add_option("--param", o.params, "NAME=VALUE (VALUE parsed as JSON when possible)")->allow_extra_args(false);
    s->add_option("--derivatives", o.derivatives, "auto or fd");
    s->add_option("--max-points", o.max_points, "Points per table and spot check");
    s->add_option("--r", o.r_list, "Defining-function values")->delimiter(',');
    s->add_option("--k", o.k_list, "sigma_k orders")->delimiter(',');
    s->add_option("--d", o.d_list, "Geodesic-sphere radii")->delimiter(',');
    s->add_option("--surface", o.surface, "geodesic-sphere | horosphere | totally-geodesic-plane | geodesic-tube");
    subs.emplace_back(s, fn);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    for (const auto& [s, fn] : subs) {
      if (!s->parsed()) continue;
      const Context ctx = build_context(s->get_name(), o);
      Report rep = fn(ctx);
      rep.seed = ctx.seed;
      if (!ctx.spec_label.empty()) rep.info["spec"] = ctx.spec_label;
      rep.print(out);
      if (!ctx.out_dir.empty()) {
        std::filesystem::create_directories(ctx.out_dir);
        std::ofstream js(ctx.out_dir / "summary.json");
        js << rep.to_json().dump(2) << '\n';
      }
      return rep.ok() ? 0 : 1;
    }
  } catch (const SpecError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace hypfol::cli
