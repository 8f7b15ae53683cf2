#include "detail/quadform.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace snseg::detail {

namespace {

constexpr double kRangeRelative = 1e-12;

double eigen_fallback(int d, const double* diff, const double* packed, double floor) {
  Eigen::MatrixXd s(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) s(i, j) = s(j, i) = packed[packed_index(i, j)];
  const Eigen::Map<const Eigen::VectorXd> v(diff, d);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double lmax = std::max(lambda.maxCoeff(), 0.0);
  const double tol = std::max(floor, lmax * kRangeRelative * d);
  const Eigen::VectorXd proj = eig.eigenvectors().transpose() * v;
  double value = 0.0;
  double outside = 0.0;
  for (int i = 0; i < d; ++i) {
    if (lambda(i) > tol)
      value += proj(i) * proj(i) / lambda(i);
    else
      outside += proj(i) * proj(i);
  }
  if (outside > kRangeRelative * v.squaredNorm()) return 0.0;
  return value;
}

}  // namespace

double pseudo_quadratic(int d, const double* diff, const double* packed, double floor, bool rank_deficient) {
  if (d == 1) return packed[0] > floor ? diff[0] * diff[0] / packed[0] : 0.0;
  if (rank_deficient) return eigen_fallback(d, diff, packed, floor);

  // Cholesky with an explicit pivot threshold; any weak pivot sends the
  // window to the eigen-based pseudo-inverse.
  constexpr int kStack = 16;
  std::array<double, kStack * (kStack + 1) / 2> stack_l{};
  std::array<double, kStack> stack_y{};
  std::vector<double> heap_l;
  std::vector<double> heap_y;
  double* l = stack_l.data();
  double* y = stack_y.data();
  if (d > kStack) {
    heap_l.resize(packed_size(d));
    heap_y.resize(static_cast<std::size_t>(d));
    l = heap_l.data();
    y = heap_y.data();
  }
  double max_diag = 0.0;
  for (int i = 0; i < d; ++i) max_diag = std::max(max_diag, packed[packed_index(i, i)]);
  const double pivot_floor = std::max(floor, kPivotRelative * max_diag);
  if (max_diag <= floor) return 0.0;

  for (int i = 0; i < d; ++i) {
    for (int j = 0; j <= i; ++j) {
      double sum = packed[packed_index(i, j)];
      for (int k = 0; k < j; ++k) sum -= l[packed_index(i, k)] * l[packed_index(j, k)];
      if (i == j) {
        if (!(sum > pivot_floor)) return eigen_fallback(d, diff, packed, floor);
        l[packed_index(i, i)] = std::sqrt(sum);
      } else {
        l[packed_index(i, j)] = sum / l[packed_index(j, j)];
      }
    }
  }
  double value = 0.0;
  for (int i = 0; i < d; ++i) {
    double sum = diff[i];
    for (int k = 0; k < i; ++k) sum -= l[packed_index(i, k)] * y[k];
    y[i] = sum / l[packed_index(i, i)];
    value += y[i] * y[i];
  }
  return value;
}

}  // namespace snseg::detail
