#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "hypfol/cli.hpp"
#include "hypfol/error.hpp"

namespace hypfol::cli {

using nlohmann::json;

namespace {

bool evaluate(const Check& c) {
  if (!std::isfinite(c.value)) return false;
  return c.kind == Check::Kind::Max ? c.value < c.tol : c.value > c.tol;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

Check& Report::add(std::string name, double value, double tol, Check::Kind kind, bool warn, std::string note) {
  Check c{std::move(name), value, tol, kind, warn, false, std::move(note)};
  c.pass = evaluate(c);
  checks_.push_back(std::move(c));
  return checks_.back();
}

Check& Report::warn(std::string name, double value, double tol, std::string note) {
  return add(std::move(name), value, tol, Check::Kind::Max, true, std::move(note));
}

void Report::merge(const Report& other) {
  checks_.insert(checks_.end(), other.checks_.begin(), other.checks_.end());
  for (auto it = other.info.begin(); it != other.info.end(); ++it) info[other.command() + "." + it.key()] = it.value();
}

const Check* Report::find(const std::string& name) const {
  for (const Check& c : checks_) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

bool Report::ok() const {
  for (const Check& c : checks_) {
    if (!c.warn && !c.pass) return false;
  }
  return true;
}

json Report::to_json() const {
  json checks = json::array();
  for (const Check& c : checks_) {
    json j = {{"name", c.name},
              {"max_residual", number(c.value)},
              {"tol", c.tol},
              {"pass", c.pass},
              {"kind", c.kind == Check::Kind::Max ? "max" : "min"},
              {"severity", c.warn ? "warn" : "check"}};
    if (!c.note.empty()) j["note"] = c.note;
    checks.push_back(std::move(j));
  }
  return {{"command", command_}, {"seed", seed}, {"wall_time_s", wall_time}, {"ok", ok()},
          {"checks", std::move(checks)}, {"info", info}};
}

void Report::print(std::ostream& os) const {
  for (const Check& c : checks_) {
    const char* status = c.pass ? "PASS" : (c.warn ? "WARN" : "FAIL");
    os << status << "  " << c.name << "  " << fmt(c.value) << (c.kind == Check::Kind::Max ? " < " : " > ")
       << fmt(c.tol);
    if (!c.note.empty()) os << "  (" << c.note << ")";
    os << '\n';
  }
  os << (ok() ? "all checks passed" : "some checks FAILED") << " [" << command_ << ", " << wall_time << " s]\n";
}

double Context::tol(const std::string& name, double fallback) const {
  const auto it = tol_overrides.find(name);
  return it == tol_overrides.end() ? fallback : it->second;
}

const MetricSpec& Context::require_spec() const {
  if (!spec) throw SpecError("this command needs a metric spec (--spec or \"spec\" in the config)");
  return *spec;
}

void Context::write(const std::string& stem, const Table& t) const {
  if (out_dir.empty()) return;
  std::filesystem::create_directories(out_dir);
  const auto path = out_dir / (stem + (format == Format::Csv ? ".csv" : ".json"));
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  if (format == Format::Csv) {
    for (std::size_t c = 0; c < t.header.size(); ++c) os << (c ? "," : "") << t.header[c];
    os << '\n';
    char buf[40];
    for (const auto& row : t.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", row[c]);
        os << (c ? "," : "") << buf;
      }
      os << '\n';
    }
  } else {
    json rows = json::array();
    for (const auto& row : t.rows) {
      json r = json::object();
      for (std::size_t c = 0; c < row.size(); ++c) r[t.header[c]] = number(row[c]);
      rows.push_back(std::move(r));
    }
    os << rows.dump(1) << '\n';
  }
}

}  // namespace hypfol::cli
