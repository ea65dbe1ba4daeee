#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace hypfol {

enum class Topology { Periodic, Open };

Topology parse_topology(std::string_view s);
std::string_view to_string(Topology t);

/// One coordinate axis of a uniform tensor-product grid.
///
/// Periodic axes hold `resolution` points with spacing L/resolution; the
/// point at `hi` is identified with the one at `lo`. Open axes hold
/// `resolution` points including both end points.
struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  int resolution = 8;
  bool periodic = false;

  double length() const { return hi - lo; }
  double spacing() const { return length() / (periodic ? resolution : resolution - 1); }
  double coord(int i) const { return lo + i * spacing(); }

  bool operator==(const Axis&) const = default;
};

/// Coordinate chart: a uniform grid over a box. Axis 0 varies fastest in
/// the linear point index.
class Chart {
 public:
  Chart() = default;
  explicit Chart(std::vector<Axis> axes);

  /// n identical axes.
  static Chart uniform(int n, Topology topology, double lo, double hi, int resolution);

  int dim() const { return static_cast<int>(axes_.size()); }
  const Axis& axis(int a) const { return axes_[a]; }
  const std::vector<Axis>& axes() const { return axes_; }
  std::size_t size() const { return size_; }
  std::size_t stride(int a) const { return strides_[a]; }
  double min_spacing() const;
  int max_resolution() const;

  void unravel(std::size_t p, std::span<int> idx) const;
  std::size_t ravel(std::span<const int> idx) const;
  void coords(std::size_t p, std::span<double> x) const;

  /// Linear index of the point `offset` cells away from `p` along `axis`,
  /// where `i` is p's index on that axis. Periodic axes wrap.
  std::size_t shifted(std::size_t p, int axis, int i, int offset) const {
    int j = i + offset;
    const int n = axes_[axis].resolution;
    if (axes_[axis].periodic) {
      j %= n;
      if (j < 0) j += n;
    }
    return p + static_cast<std::ptrdiff_t>(j - i) * static_cast<std::ptrdiff_t>(strides_[axis]);
  }

  bool operator==(const Chart& o) const { return axes_ == o.axes_; }

 private:
  std::vector<Axis> axes_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

/// Region where a sampled quantity is trustworthy. On open axes a point is
/// valid when it lies at least `margin[a]` cells from both ends; periodic
/// axes are always valid.
struct Validity {
  std::vector<int> margin;

  static Validity full(const Chart& chart);

  /// Shrinks the region by `width` cells on every open axis (one stencil
  /// application).
  Validity eroded(const Chart& chart, int width) const;
  Validity merged(const Validity& other) const;
  bool contains(const Chart& chart, std::span<const int> idx) const;
  bool empty(const Chart& chart) const;

  bool operator==(const Validity&) const = default;
};

/// Calls fn(p, idx) for each valid point in linear order.
template <class Fn>
void for_each_valid(const Chart& chart, const Validity& valid, Fn&& fn) {
  std::vector<int> idx(chart.dim(), 0);
  for (std::size_t p = 0; p < chart.size(); ++p) {
    if (p > 0) {
      for (int a = 0; a < chart.dim(); ++a) {
        if (++idx[a] < chart.axis(a).resolution) break;
        idx[a] = 0;
      }
    }
    if (valid.contains(chart, idx)) fn(p, std::span<const int>(idx));
  }
}

}  // namespace hypfol
