#include "hypfol/field.hpp"

#include <cmath>
#include <string>

#include "hypfol/error.hpp"

namespace hypfol {

Mat SymTensorField::matrix(std::size_t p) const {
  Mat m(n_, n_);
  const double* d = data_.data() + p * ncomp_;
  int k = 0;
  for (int i = 0; i < n_; ++i) {
    for (int j = i; j < n_; ++j, ++k) {
      m(i, j) = d[k];
      m(j, i) = d[k];
    }
  }
  return m;
}

void SymTensorField::set_symmetrized(std::size_t p, const Mat& m) {
  double* d = data_.data() + p * ncomp_;
  int k = 0;
  for (int i = 0; i < n_; ++i) {
    for (int j = i; j < n_; ++j, ++k) d[k] = 0.5 * (m(i, j) + m(j, i));
  }
}

void SymTensorField::set_checked(std::size_t p, const Mat& m, double rel_tol) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  for (int i = 0; i < n_; ++i) {
    for (int j = i + 1; j < n_; ++j) {
      if (std::abs(m(i, j) - m(j, i)) > rel_tol * scale) {
        throw GeometryError("tensor not symmetric at point " + std::to_string(p) + " (" +
                            std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
  double* d = data_.data() + p * ncomp_;
  int k = 0;
  for (int i = 0; i < n_; ++i) {
    for (int j = i; j < n_; ++j, ++k) d[k] = m(i, j);
  }
}

void require_same_chart(const Chart& a, const Chart& b, const char* op) {
  if (!(a == b)) throw GeometryError(std::string(op) + ": chart mismatch");
}

double sup_norm(const ScalarField& f) {
  double m = 0.0;
  for_each_valid(f.chart(), f.validity(), [&](std::size_t p, auto) { m = std::max(m, std::abs(f[p])); });
  return m;
}

}  // namespace hypfol
