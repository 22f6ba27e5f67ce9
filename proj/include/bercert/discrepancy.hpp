#pragma once

// Kolmogorov discrepancy between Bin(n,p) and the matching normal law.
//
// With F(x) = P(S_n < x) and G(x) = Phi((x - np)/sigma), the supremum of
// |F - G| is attained at a jump of F, where two one-sided comparisons are
// needed:
//
//   delta_{n,i}(p) = max(|F(i) - G(i)|, |F(i+1) - G(i)|),  0 <= i <= n,
//   delta_n(p)     = max_i delta_{n,i}(p),
//   T_n(p)         = sqrt(n) delta_n(p) / rho(p).

#include <cstdint>
#include <vector>

#include "bercert/numerics.hpp"

namespace bercert {

enum class EvalMode { FullRange, RestrictedWindow };

const char* to_string(EvalMode mode);

/// Inclusive range of indices i evaluated in RestrictedWindow mode.
struct KWindow {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

/// Largest n for which only FullRange evaluation is admitted.
inline constexpr std::int64_t kFullRangeMaxN = 200;

/// Half-width multiplier of the restricted window, sqrt(3 + sqrt(6)).
double window_nu();

/// [max(0, ceil(np - (nu+1) sigma)), min(n, floor(np + nu sigma))].
KWindow restricted_window(const BinomialPoint& point);

/// FullRange for n <= 200, RestrictedWindow above.
EvalMode default_mode(std::int64_t n);

struct DiscrepancyRecord {
  BinomialPoint point;
  double delta = 0.0;
  std::int64_t k_star = 0;
  double t_value = 0.0;
  EvalMode mode = EvalMode::FullRange;
};

/// Normalized third absolute moment (p^2 + q^2)/sqrt(pq) of a centered
/// Bernoulli variable.
double rho(double p);

/// (2 - p) / (3 sqrt(2 pi) (p^2 + q^2)), defined on (0, 0.5].
double script_E(double p);

/// (p^2 + q^2) script_E(p) = (2 - p) / (3 sqrt(2 pi)), defined on (0, 0.5].
double script_E1(double p);

/// Two-sided discrepancy at the jump i, from independent CDF evaluations.
double delta_nk(const BinomialPoint& point, std::int64_t i);

/// Signed local deviation P_n(k) - phi((k - np)/sigma)/sigma.
double local_delta(const BinomialPoint& point, std::int64_t k);

/// |q e^{-itp} + p e^{itq}| = sqrt(q^2 + p^2 + 2pq cos t).
double char_fn_modulus(double p, double t);

/// Evaluates delta_n(p) with one pmf-recurrence pass. Holds a scratch buffer,
/// so one evaluator per thread; results never depend on previous calls.
class DiscrepancyEvaluator {
 public:
  DiscrepancyRecord evaluate(const BinomialPoint& point, EvalMode mode);

  /// T_n(p) under the default mode policy; p > 0.5 is evaluated at 1 - p.
  double t_value(std::int64_t n, double p);

 private:
  std::vector<double> pmf_;
};

/// Convenience wrapper over DiscrepancyEvaluator.
DiscrepancyRecord delta_n(const BinomialPoint& point, EvalMode mode);

/// T_n(p) under the default mode policy.
double t_value(std::int64_t n, double p);

}  // namespace bercert
