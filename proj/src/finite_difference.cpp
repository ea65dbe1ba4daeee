#include "hypfol/finite_difference.hpp"

#include <algorithm>

namespace hypfol::fd {

void derivatives(const Field& f, std::size_t p, std::span<const int> idx, double* d1, double* d2) {
  const Chart& chart = f.chart();
  const int dim = chart.dim();
  const int nc = f.ncomp();
  const double* data = f.data().data();

  std::size_t nb[kMaxDim][5];
  for (int a = 0; a < dim; ++a) {
    for (int o = -kHalfWidth; o <= kHalfWidth; ++o) nb[a][o + 2] = chart.shifted(p, a, idx[a], o);
  }

  std::fill(d1, d1 + dim * nc, 0.0);
  for (int a = 0; a < dim; ++a) {
    const double inv_h = 1.0 / chart.axis(a).spacing();
    double* out = d1 + a * nc;
    for (int o = 1; o <= kHalfWidth; ++o) {
      const double w = kFirst[2 + o] * inv_h;
      const double* up = data + nb[a][2 + o] * nc;
      const double* dn = data + nb[a][2 - o] * nc;
      for (int c = 0; c < nc; ++c) out[c] += w * (up[c] - dn[c]);
    }
  }
  if (d2 == nullptr) return;

  std::fill(d2, d2 + sym_size(dim) * nc, 0.0);
  const double* centre = data + p * nc;
  for (int a = 0; a < dim; ++a) {
    const double ha = chart.axis(a).spacing();
    double* out = d2 + sym_index(a, a, dim) * nc;
    for (int o = 1; o <= kHalfWidth; ++o) {
      const double w = kSecond[2 + o] / (ha * ha);
      const double* up = data + nb[a][2 + o] * nc;
      const double* dn = data + nb[a][2 - o] * nc;
      for (int c = 0; c < nc; ++c) out[c] += w * ((up[c] - centre[c]) + (dn[c] - centre[c]));
    }
    for (int b = a + 1; b < dim; ++b) {
      const double hb = chart.axis(b).spacing();
      double* outab = d2 + sym_index(a, b, dim) * nc;
      for (int oa = 1; oa <= kHalfWidth; ++oa) {
        for (int ob = 1; ob <= kHalfWidth; ++ob) {
          const double w = kFirst[2 + oa] * kFirst[2 + ob] / (ha * hb);
          const std::size_t ua = nb[a][2 + oa], da = nb[a][2 - oa];
          const double* uu = data + chart.shifted(ua, b, idx[b], ob) * nc;
          const double* ud = data + chart.shifted(ua, b, idx[b], -ob) * nc;
          const double* du = data + chart.shifted(da, b, idx[b], ob) * nc;
          const double* dd = data + chart.shifted(da, b, idx[b], -ob) * nc;
          for (int c = 0; c < nc; ++c) outab[c] += w * ((uu[c] - ud[c]) - (du[c] - dd[c]));
        }
      }
    }
  }
}

void gradient(const Field& f, std::size_t p, std::span<const int> idx, int comp, double* d1) {
  const Chart& chart = f.chart();
  const int nc = f.ncomp();
  const double* data = f.data().data();
  for (int a = 0; a < chart.dim(); ++a) {
    const double inv_h = 1.0 / chart.axis(a).spacing();
    double s = 0.0;
    for (int o = 1; o <= kHalfWidth; ++o) {
      s += kFirst[2 + o] * (data[chart.shifted(p, a, idx[a], o) * nc + comp] -
                            data[chart.shifted(p, a, idx[a], -o) * nc + comp]);
    }
    d1[a] = s * inv_h;
  }
}

}  // namespace hypfol::fd
