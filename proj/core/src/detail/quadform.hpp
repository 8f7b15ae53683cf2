#pragma once

#include <cstddef>

namespace snseg::detail {

// Packed lower triangle, row-major: entry (i, j) with j <= i sits at i(i+1)/2 + j.
inline std::size_t packed_index(int i, int j) noexcept {
  return static_cast<std::size_t>(i) * static_cast<std::size_t>(i + 1) / 2 + static_cast<std::size_t>(j);
}

inline std::size_t packed_size(int d) noexcept { return packed_index(d, 0); }

// A Cholesky pivot below this fraction of the largest diagonal entry marks
// the matrix as numerically singular.
inline constexpr double kPivotRelative = 1e-13;

// Sum over l = 1..m-1 of l^2 (m-l)^2 / m^2, the total weight of an interval
// normalizer of length m. Used to size the rounding floor.
inline double normalizer_weight(int m) noexcept {
  const double x = m;
  return (x * x * x * x - 1.0) / (30.0 * x);
}

// Rounding floor below which a normalizer is treated as singular. theta_scale
// is the largest magnitude among the estimates entering the contrast.
inline double normalizer_floor(int m_left, int m_right, double theta_scale) noexcept {
  constexpr double kRelative = 1e-24;
  return kRelative * (normalizer_weight(m_left) + normalizer_weight(m_right)) * theta_scale * theta_scale;
}

// diff' S^+ diff for the packed symmetric PSD matrix S. Falls back to the
// Moore-Penrose inverse when S is (numerically) singular and returns 0 when
// diff has a component outside the range of S. Callers that know S has rank
// below d pass rank_deficient; a weak Cholesky pivot is not a reliable sign
// of singularity, so those go straight to the eigendecomposition.
double pseudo_quadratic(int d, const double* diff, const double* packed, double floor, bool rank_deficient = false);

// Upper bound on the rank of an interval normalizer sum: each side of length
// m contributes at most m - 1 outer products.
inline bool normalizer_rank_deficient(int d, int m_left, int m_right) noexcept {
  return m_left + m_right - 2 < d;
}

}  // namespace snseg::detail
