#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "hypfol/chart.hpp"

namespace hypfol {

/// Largest matrix dimension handled pointwise (boundary n <= 5, bulk n+1 <= 6).
inline constexpr int kMaxDim = 6;

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

/// Number of independent components of a symmetric n x n tensor.
constexpr int sym_size(int n) { return n * (n + 1) / 2; }

/// Packed position of (i, j) in upper-triangle row order.
constexpr int sym_index(int i, int j, int n) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i - 1) / 2 + (j - i);
}

/// Per-point array of `ncomp` reals over a chart, with a validity region.
class Field {
 public:
  Field() = default;
  Field(Chart chart, int ncomp, Validity valid)
      : chart_(std::move(chart)),
        valid_(std::move(valid)),
        ncomp_(ncomp),
        data_(chart_.size() * static_cast<std::size_t>(ncomp), 0.0) {}

  const Chart& chart() const { return chart_; }
  const Validity& validity() const { return valid_; }
  void set_validity(Validity v) { valid_ = std::move(v); }
  int ncomp() const { return ncomp_; }
  std::size_t size() const { return chart_.size(); }

  std::span<double> at(std::size_t p) { return {data_.data() + p * ncomp_, static_cast<std::size_t>(ncomp_)}; }
  std::span<const double> at(std::size_t p) const {
    return {data_.data() + p * ncomp_, static_cast<std::size_t>(ncomp_)};
  }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 protected:
  Chart chart_;
  Validity valid_;
  int ncomp_ = 0;
  std::vector<double> data_;
};

/// Rank-0 field.
class ScalarField : public Field {
 public:
  ScalarField() = default;
  ScalarField(Chart chart, Validity valid) : Field(std::move(chart), 1, std::move(valid)) {}
  explicit ScalarField(const Chart& chart) : ScalarField(chart, Validity::full(chart)) {}

  double operator[](std::size_t p) const { return data_[p]; }
  double& operator[](std::size_t p) { return data_[p]; }
};

/// Symmetric rank-2 field stored as the packed upper triangle, so
/// T_ij == T_ji holds exactly.
class SymTensorField : public Field {
 public:
  SymTensorField() = default;
  SymTensorField(Chart chart, Validity valid)
      : Field(chart, sym_size(chart.dim()), std::move(valid)), n_(chart.dim()) {}
  explicit SymTensorField(const Chart& chart) : SymTensorField(chart, Validity::full(chart)) {}

  int n() const { return n_; }
  double get(std::size_t p, int i, int j) const { return data_[p * ncomp_ + sym_index(i, j, n_)]; }
  Mat matrix(std::size_t p) const;

  /// Stores the upper triangle of `m` averaged with its transpose; for
  /// results of floating-point algebra.
  void set_symmetrized(std::size_t p, const Mat& m);

  /// Stores `m`, rejecting it (GeometryError) unless it is symmetric to
  /// `rel_tol` relative to its largest entry.
  void set_checked(std::size_t p, const Mat& m, double rel_tol = 1e-12);

 private:
  int n_ = 0;
};

/// Field of n-vectors, e.g. per-point eigenvalue lists.
class VecField : public Field {
 public:
  VecField() = default;
  VecField(Chart chart, int n, Validity valid) : Field(std::move(chart), n, std::move(valid)) {}

  double get(std::size_t p, int i) const { return data_[p * ncomp_ + i]; }
  double& ref(std::size_t p, int i) { return data_[p * ncomp_ + i]; }
};

/// Throws GeometryError when two fields live on different charts.
void require_same_chart(const Chart& a, const Chart& b, const char* op);

/// Max over valid points of |f|.
double sup_norm(const ScalarField& f);

}  // namespace hypfol
