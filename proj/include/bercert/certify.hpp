#pragma once

// Lipschitz control of p -> delta_{n,k}(p)/rho(p) on (0, 0.5] and the grid
// certificates built from it.
//
// For 0 < a < p <= 0.5 and every n, k:
//   |delta_{n,k}(p)/rho(p) - delta_{n,k}(a)/rho(a)| <= L(a) (p - a),
// and the same modulus L(a) controls the distance to any node b > p. Scaling
// by sqrt(n) turns a maximum of T_n over grid nodes into a bound on the
// supremum over the whole interval.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "bercert/numerics.hpp"

namespace bercert {

struct LipschitzConstants {
  double c1 = 0.516;
  double c2 = 0.121;
  double c3 = 0.271;
};

inline constexpr LipschitzConstants kLipschitz{};

/// L(p) = [c1/p + c2 + c3 (1-2p)(1+2pq)/(1-2pq)] / ((1-2pq) sqrt(pq)).
/// Decreasing on (0, 0.5].
double lipschitz_L(double p);

/// (c1/q + c2)/(pq): bounds |d/dp [F(k+1) - G(k)]|.
double lipschitz_L1(double p);

/// (c1/p + c2)/(pq): bounds |d/dp [F(k) - G(k)]|.
double lipschitz_L2(double p);

/// L2(p)/rho(p) = (c1 + c2 p)/(p sqrt(pq)(1 - 2pq)).
double lipschitz_L3(double p);

/// (1-2p)(1+2pq)/(sqrt(pq)(1-2pq)^2), which is 2 d/dp [1/rho(p)]. p in (0, 0.5).
double A_func(double p);

/// d/dp P(S_n < k) = -(k/p) P_n(k); with shifted = true,
/// d/dp P(S_n < k+1) = -((n-k)/q) P_n(k).
double dF_dp(std::int64_t n, std::int64_t k, double p, bool shifted);

/// d/dp Phi((x - np)/sqrt(npq)) = -(x(1-2p) + np)/(2pq sqrt(npq)) phi((x-np)/sqrt(npq)).
double dG_dp(std::int64_t n, double x, double p);

/// Certified upper bound on sup of T_n over [p_lo, p_hi] from a uniform grid.
struct GridCertificate {
  std::int64_t n = 0;
  double p_lo = 0.0;
  double p_hi = 0.5;
  double step = 0.0;
  double grid_max = 0.0;
  double slack = 0.0;
  double certified_bound = 0.0;
};

/// grid_max + sqrt(n) (h/2) L(p_lo). The grid must cover [p_lo, p_hi] with
/// step h; grid_max is the maximum of T_n over its nodes.
GridCertificate certify_interval(std::int64_t n, double grid_max, double p_lo, double h,
                                 double p_hi = 0.5);

/// Bound on sup of T_n over the cell [a, b] from its endpoint values:
/// (t_a + t_b)/2 + sqrt(n) L(a) (b - a)/2.
double cell_bound(std::int64_t n, double a, double b, double t_a, double t_b);

struct CellRefinement {
  double bound = 0.0;        // certified sup of T_n over the cell
  double max_seen = 0.0;     // largest T_n evaluated inside the cell
  double argmax_seen = 0.0;  // where max_seen was found
  std::int64_t evaluations = 0;
};

/// Bisects [a, b] until every sub-cell bound drops below `target`, a sub-cell
/// endpoint reaches `target`, or `max_depth` halvings are reached, then
/// returns the largest sub-cell bound.
/// Deterministic: the result depends only on the arguments.
template <class TFunc>
CellRefinement refine_cell(std::int64_t n, double a, double b, double t_a, double t_b,
                           TFunc&& t_of_p, double target, int max_depth) {
  struct Cell {
    double a, b, ta, tb;
    int depth;
  };
  CellRefinement out;
  out.max_seen = std::max(t_a, t_b);
  out.argmax_seen = t_a >= t_b ? a : b;
  std::vector<Cell> stack{{a, b, t_a, t_b, 0}};
  while (!stack.empty()) {
    const Cell c = stack.back();
    stack.pop_back();
    const double bound = cell_bound(n, c.a, c.b, c.ta, c.tb);
    const double mid = 0.5 * (c.a + c.b);
    // An endpoint at or above target means no subdivision can succeed.
    const bool futile = std::max(c.ta, c.tb) >= target;
    if (bound < target || futile || c.depth >= max_depth || !(c.a < mid && mid < c.b)) {
      out.bound = std::max(out.bound, bound);
      continue;
    }
    const double tm = t_of_p(mid);
    ++out.evaluations;
    if (tm > out.max_seen) {
      out.max_seen = tm;
      out.argmax_seen = mid;
    }
    stack.push_back({mid, c.b, tm, c.tb, c.depth + 1});
    stack.push_back({c.a, mid, c.ta, tm, c.depth + 1});
  }
  return out;
}

}  // namespace bercert
