#include "bercert/discrepancy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace bercert {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;
// Left-tail terms below this fraction of the running sum are dropped.
constexpr double kTailNegligible = 1e-18;

void require_half_interval(double p, const char* what) {
  if (!(p > 0.0 && p <= 0.5)) {
    std::ostringstream msg;
    msg << what << ": p must lie in (0, 0.5], got " << p;
    throw DomainError(msg.str());
  }
}

std::int64_t mode_of(const BinomialPoint& point) {
  const auto m = static_cast<std::int64_t>(std::floor((static_cast<double>(point.n()) + 1.0) * point.p()));
  return std::clamp<std::int64_t>(m, 0, point.n());
}

}  // namespace

const char* to_string(EvalMode mode) {
  return mode == EvalMode::FullRange ? "full_range" : "restricted_window";
}

double window_nu() {
  static const double nu = std::sqrt(3.0 + std::sqrt(6.0));
  return nu;
}

KWindow restricted_window(const BinomialPoint& point) {
  const double nu = window_nu();
  const double s = point.sigma();
  const double np = point.mean();
  const std::int64_t n = point.n();
  KWindow w;
  w.lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(np - (nu + 1.0) * s)));
  w.hi = std::min<std::int64_t>(n, static_cast<std::int64_t>(std::floor(np + nu * s)));
  if (w.lo > w.hi) {
    // Only reachable for sigma well below one.
    const auto c = std::clamp<std::int64_t>(std::llround(np), 0, n);
    w.lo = w.hi = c;
  }
  return w;
}

EvalMode default_mode(std::int64_t n) {
  return n <= kFullRangeMaxN ? EvalMode::FullRange : EvalMode::RestrictedWindow;
}

double rho(double p) {
  detail::require_probability(p, "rho");
  const double q = 1.0 - p;
  return (p * p + q * q) / std::sqrt(p * q);
}

double script_E1(double p) {
  require_half_interval(p, "script_E1");
  return (2.0 - p) * kInvSqrt2Pi / 3.0;
}

double script_E(double p) {
  require_half_interval(p, "script_E");
  const double q = 1.0 - p;
  return script_E1(p) / (p * p + q * q);
}

double delta_nk(const BinomialPoint& point, std::int64_t i) {
  if (i < 0 || i > point.n()) {
    std::ostringstream msg;
    msg << "delta_nk: index " << i << " outside [0," << point.n() << "]";
    throw DomainError(msg.str());
  }
  const double g = normal_cdf(
      std::fma(-static_cast<double>(point.n()), point.p(), static_cast<double>(i)) / point.sigma());
  const double f_left = binom_cdf_strict(point.n(), i, point.p());
  const double f_right = binom_cdf_strict(point.n(), i + 1, point.p());
  return std::max(std::abs(f_left - g), std::abs(f_right - g));
}

double local_delta(const BinomialPoint& point, std::int64_t k) {
  if (k < 0 || k > point.n()) {
    std::ostringstream msg;
    msg << "local_delta: index " << k << " outside [0," << point.n() << "]";
    throw DomainError(msg.str());
  }
  const double s = point.sigma();
  return binom_pmf(point.n(), k, point.p()) -
         normal_pdf((static_cast<double>(k) - point.mean()) / s) / s;
}

double char_fn_modulus(double p, double t) {
  detail::require_probability(p, "char_fn_modulus");
  const double q = 1.0 - p;
  const double sq = q * q + p * p + 2.0 * p * q * std::cos(t);
  return std::sqrt(std::max(0.0, sq));
}

DiscrepancyRecord DiscrepancyEvaluator::evaluate(const BinomialPoint& point, EvalMode mode) {
  const std::int64_t n = point.n();
  if (mode == EvalMode::RestrictedWindow && n <= kFullRangeMaxN) {
    std::ostringstream msg;
    msg << "delta_n: restricted window requires n > " << kFullRangeMaxN << ", got n = " << n;
    throw PreconditionError(msg.str());
  }
  const double p = point.p();
  const double q = point.q();
  const double nd = static_cast<double>(n);
  const double s = point.sigma();

  const KWindow w = restricted_window(point);
  const std::int64_t anchor = w.lo;
  const std::int64_t top = mode == EvalMode::FullRange ? n : w.hi;
  const std::int64_t first = mode == EvalMode::FullRange ? 0 : anchor;

  // pmf over [lo_idx, hi_idx] by the ratio recurrence from the mode. The
  // values at any fixed index do not depend on how far the buffer extends.
  const std::int64_t mode_idx = mode_of(point);
  const std::int64_t lo_idx = std::min(first, mode_idx);
  const std::int64_t hi_idx = std::max(top, mode_idx);
  pmf_.assign(static_cast<std::size_t>(hi_idx - lo_idx + 1), 0.0);
  auto at = [&](std::int64_t k) -> double& { return pmf_[static_cast<std::size_t>(k - lo_idx)]; };
  at(mode_idx) = binom_pmf(n, mode_idx, p);
  // p and q enter each step separately so rounding does not drift one way.
  for (std::int64_t k = mode_idx; k > lo_idx; --k) {
    at(k - 1) = at(k) * ((static_cast<double>(k) * q) / (static_cast<double>(n - k + 1) * p));
  }
  for (std::int64_t k = mode_idx; k < hi_idx; ++k) {
    at(k + 1) = at(k) * ((static_cast<double>(n - k) * p) / (static_cast<double>(k + 1) * q));
  }

  // F(anchor) = P(S < anchor), summed downward from anchor-1.
  CompensatedSum cdf;
  if (anchor > 0) {
    double term = at(anchor);
    for (std::int64_t k = anchor; k > 0; --k) {
      const double ratio = (static_cast<double>(k) * q) / (static_cast<double>(n - k + 1) * p);
      term *= ratio;
      cdf.add(term);
      if (term == 0.0) break;
      if (ratio < 1.0 && term * ratio / (1.0 - ratio) < kTailNegligible * cdf.value()) break;
    }
  }

  double best = -1.0;
  std::int64_t best_i = first;
  auto consider = [&](std::int64_t i, double f_left, double f_right) {
    // i - np with a single rounding
    const double g = normal_cdf(std::fma(-nd, p, static_cast<double>(i)) / s);
    const double d = std::max(std::abs(f_left - g), std::abs(f_right - g));
    if (d > best) {
      best = d;
      best_i = i;
    }
  };

  if (mode == EvalMode::FullRange && anchor > 0) {
    CompensatedSum head;
    for (std::int64_t i = 0; i < anchor; ++i) {
      const double f_left = head.value();
      head.add(at(i));
      consider(i, f_left, head.value());
    }
  }
  for (std::int64_t i = anchor; i <= top; ++i) {
    const double f_left = cdf.value();
    cdf.add(at(i));
    consider(i, f_left, cdf.value());
  }

  DiscrepancyRecord rec{point};
  rec.delta = best;
  rec.k_star = best_i;
  rec.t_value = std::sqrt(static_cast<double>(n)) * best / rho(p);
  rec.mode = mode;
  return rec;
}

double DiscrepancyEvaluator::t_value(std::int64_t n, double p) {
  // T_n(p) = T_n(1-p); folding makes the two evaluations share one rounding path.
  const double folded = p > 0.5 ? 1.0 - p : p;
  return evaluate(BinomialPoint(n, folded), default_mode(n)).t_value;
}

DiscrepancyRecord delta_n(const BinomialPoint& point, EvalMode mode) {
  DiscrepancyEvaluator eval;
  return eval.evaluate(point, mode);
}

double t_value(std::int64_t n, double p) {
  DiscrepancyEvaluator eval;
  return eval.t_value(n, p);
}

}  // namespace bercert
