#pragma once

#include <span>

#include "hypfol/field.hpp"

namespace hypfol::fd {

/// Half-width of the 4th-order central stencils.
inline constexpr int kHalfWidth = 2;

/// f'(0) ~ sum_o kFirst[o + 2] f(o h) / h
inline constexpr double kFirst[5] = {1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0};
/// f''(0) ~ sum_o kSecond[o + 2] f(o h) / h^2
inline constexpr double kSecond[5] = {-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0};

/// First and second partial derivatives of every component of `f` at grid
/// point `p` (multi-index `idx`), by 4th-order central differences.
///
/// d1[a * nc + c]            = d_a f_c
/// d2[sym_index(a,b,dim)*nc + c] = d_a d_b f_c   (only when d2 != nullptr)
///
/// On open axes `idx` must be at least two cells from both ends.
void derivatives(const Field& f, std::size_t p, std::span<const int> idx, double* d1, double* d2);

/// Output of `derivatives` restricted to one component: d1 only.
void gradient(const Field& f, std::size_t p, std::span<const int> idx, int comp, double* d1);

}  // namespace hypfol::fd
