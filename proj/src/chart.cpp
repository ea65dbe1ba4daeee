#include "hypfol/chart.hpp"

#include <algorithm>
#include <string>

#include "hypfol/error.hpp"

namespace hypfol {

Topology parse_topology(std::string_view s) {
  if (s == "periodic-box" || s == "periodic") return Topology::Periodic;
  if (s == "open-box" || s == "open") return Topology::Open;
  throw SpecError("unknown topology '" + std::string(s) + "'");
}

std::string_view to_string(Topology t) {
  return t == Topology::Periodic ? "periodic-box" : "open-box";
}

Chart::Chart(std::vector<Axis> axes) : axes_(std::move(axes)) {
  strides_.resize(axes_.size());
  size_ = 1;
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    if (axes_[a].resolution < 1 || !(axes_[a].hi > axes_[a].lo)) {
      throw SpecError("degenerate chart axis " + std::to_string(a));
    }
    if (!axes_[a].periodic && axes_[a].resolution < 2) {
      throw SpecError("open axis needs at least two points");
    }
    strides_[a] = size_;
    size_ *= static_cast<std::size_t>(axes_[a].resolution);
  }
}

Chart Chart::uniform(int n, Topology topology, double lo, double hi, int resolution) {
  std::vector<Axis> axes(n, Axis{lo, hi, resolution, topology == Topology::Periodic});
  return Chart(std::move(axes));
}

double Chart::min_spacing() const {
  double h = axes_.front().spacing();
  for (const auto& ax : axes_) h = std::min(h, ax.spacing());
  return h;
}

int Chart::max_resolution() const {
  int m = 0;
  for (const auto& ax : axes_) m = std::max(m, ax.resolution);
  return m;
}

void Chart::unravel(std::size_t p, std::span<int> idx) const {
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    idx[a] = static_cast<int>(p % axes_[a].resolution);
    p /= axes_[a].resolution;
  }
}

std::size_t Chart::ravel(std::span<const int> idx) const {
  std::size_t p = 0;
  for (std::size_t a = 0; a < axes_.size(); ++a) p += strides_[a] * idx[a];
  return p;
}

void Chart::coords(std::size_t p, std::span<double> x) const {
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    const int i = static_cast<int>(p % axes_[a].resolution);
    p /= axes_[a].resolution;
    x[a] = axes_[a].coord(i);
  }
}

Validity Validity::full(const Chart& chart) { return Validity{std::vector<int>(chart.dim(), 0)}; }

Validity Validity::eroded(const Chart& chart, int width) const {
  Validity v = *this;
  for (int a = 0; a < chart.dim(); ++a) {
    if (!chart.axis(a).periodic) v.margin[a] += width;
  }
  return v;
}

Validity Validity::merged(const Validity& other) const {
  Validity v = *this;
  for (std::size_t a = 0; a < v.margin.size(); ++a) v.margin[a] = std::max(v.margin[a], other.margin[a]);
  return v;
}

bool Validity::contains(const Chart& chart, std::span<const int> idx) const {
  for (int a = 0; a < chart.dim(); ++a) {
    const Axis& ax = chart.axis(a);
    if (ax.periodic) continue;
    if (idx[a] < margin[a] || idx[a] > ax.resolution - 1 - margin[a]) return false;
  }
  return true;
}

bool Validity::empty(const Chart& chart) const {
  for (int a = 0; a < chart.dim(); ++a) {
    const Axis& ax = chart.axis(a);
    if (!ax.periodic && 2 * margin[a] > ax.resolution - 1) return true;
  }
  return false;
}

}  // namespace hypfol
