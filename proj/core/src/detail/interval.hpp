#pragma once

#include <vector>

#include "snseg/functionals.hpp"

namespace snseg::detail {

// Adds sum over l = 1..m-1 of l^2 (m-l)^2 / m^2 * (left_l - right_l)(left_l - right_l)'
// to the packed matrix out. Row l-1 of left is the estimate on the first l
// points of the interval, row l-1 of right the estimate on the remaining
// m - l points. Rows flagged invalid contribute nothing.
void accumulate_normalizer(int d, int m, const double* left, const unsigned char* left_ok,
                           const double* right, const unsigned char* right_ok, double* out);

// Estimate and packed normalizer for one interval [a, b], computed from scratch.
struct IntervalStats {
  bool valid = false;
  std::vector<double> theta;
  std::vector<double> sn;
};

IntervalStats interval_stats(const Estimator& est, int a, int b, Estimator::Workspace& ws);

// Window statistic from the two interval summaries; 0 when degenerate.
double window_statistic(int d, int m_left, const double* theta_left, const double* sn_left,
                        int m_right, const double* theta_right, const double* sn_right,
                        double* scratch);

}  // namespace snseg::detail
