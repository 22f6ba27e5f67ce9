#include "bercert/numerics.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace bercert {

namespace detail {

void require_probability(double p, const char* what) {
  if (!(p > 0.0 && p < 1.0)) {
    std::ostringstream msg;
    msg << what << ": success probability must lie in (0,1), got " << p;
    throw DomainError(msg.str());
  }
}

}  // namespace detail

namespace {

// ln(n!) - (n+1/2)ln n + n - ln sqrt(2 pi) for n = 1..15, to full precision.
constexpr std::array<double, 16> kStirlingErrorTable = {
    0.0,
    0.08106146679532725821967,
    0.04134069595540929409382,
    0.02767792568499833914879,
    0.02079067210376509311152,
    0.01664469118982119216319,
    0.01387612882307074799875,
    0.01189670994589177009506,
    0.01041126526197209649748,
    0.009255462182712732917729,
    0.008330563433362871256469,
    0.007573675487951840794972,
    0.006942840107209529865664,
    0.00640899418800420706844,
    0.005951370112758847735624,
    0.005554733551962801371039,
};

constexpr double kLn2Pi = 1.8378770664093454835606594728112;

void require_index(std::int64_t n, std::int64_t k, const char* what) {
  if (n < 1) {
    std::ostringstream msg;
    msg << what << ": number of trials must be >= 1, got " << n;
    throw DomainError(msg.str());
  }
  if (k < 0 || k > n) {
    std::ostringstream msg;
    msg << what << ": index " << k << " outside [0," << n << "]";
    throw DomainError(msg.str());
  }
}

}  // namespace

BinomialPoint::BinomialPoint(std::int64_t n, double p) : n_(n), p_(p) {
  if (n < 1) {
    std::ostringstream msg;
    msg << "BinomialPoint: n must be >= 1, got " << n;
    throw DomainError(msg.str());
  }
  detail::require_probability(p, "BinomialPoint");
  q_ = 1.0 - p;
  mean_ = static_cast<double>(n) * p;
  sigma_ = std::sqrt(static_cast<double>(n) * p * q_);
}

double stirling_error(std::int64_t n) {
  if (n < 0) throw DomainError("stirling_error: negative argument");
  if (n < 16) return kStirlingErrorTable[static_cast<std::size_t>(n)];
  constexpr double s0 = 1.0 / 12.0;
  constexpr double s1 = 1.0 / 360.0;
  constexpr double s2 = 1.0 / 1260.0;
  constexpr double s3 = 1.0 / 1680.0;
  constexpr double s4 = 1.0 / 1188.0;
  const double inv = 1.0 / static_cast<double>(n);
  const double inv2 = inv * inv;
  if (n > 500) return (s0 - s1 * inv2) * inv;
  if (n > 80) return (s0 - (s1 - s2 * inv2) * inv2) * inv;
  if (n > 35) return (s0 - (s1 - (s2 - s3 * inv2) * inv2) * inv2) * inv;
  return (s0 - (s1 - (s2 - (s3 - s4 * inv2) * inv2) * inv2) * inv2) * inv;
}

double binomial_deviance(double x, double np) {
  if (x == 0.0) return np;
  if (std::abs(x - np) < 0.1 * (x + np)) {
    // Series in v = (x-np)/(x+np); converges fast for |v| < 0.1.
    const double v = (x - np) / (x + np);
    double s = (x - np) * v;
    double ej = 2.0 * x * v;
    const double v2 = v * v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v2;
      const double s1 = s + ej / (2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
    return s;
  }
  return x * std::log(x / np) + np - x;
}

double log_binom_pmf(std::int64_t n, std::int64_t k, double p) {
  require_index(n, k, "log_binom_pmf");
  detail::require_probability(p, "log_binom_pmf");
  const double q = 1.0 - p;
  const double nd = static_cast<double>(n);
  if (k == 0) return nd * std::log1p(-p);
  if (k == n) return nd * std::log(p);
  const double kd = static_cast<double>(k);
  const double md = static_cast<double>(n - k);
  const double lc = stirling_error(n) - stirling_error(k) - stirling_error(n - k) -
                    binomial_deviance(kd, nd * p) - binomial_deviance(md, nd * q);
  return lc + 0.5 * (std::log(nd / (kd * md)) - kLn2Pi);
}

double binom_pmf(std::int64_t n, std::int64_t k, double p) {
  return std::exp(log_binom_pmf(n, k, p));
}

double binom_cdf_strict(std::int64_t n, std::int64_t x, double p) {
  detail::require_probability(p, "binom_cdf_strict");
  if (n < 1) throw DomainError("binom_cdf_strict: number of trials must be >= 1");
  if (x <= 0) return 0.0;
  if (x > n) return 1.0;

  const double q = 1.0 - p;
  const double r = p / q;
  const double nd = static_cast<double>(n);
  std::int64_t mode = static_cast<std::int64_t>(std::floor((nd + 1.0) * p));
  if (mode > n) mode = n;

  // Tail terms shrink geometrically away from the mode; stop once the
  // geometric majorant of what is left is negligible.
  constexpr double kNegligible = 1e-18;
  const std::int64_t last = x - 1;
  if (last < mode) {
    CompensatedSum sum;
    double term = binom_pmf(n, last, p);
    for (std::int64_t k = last;; --k) {
      sum.add(term);
      if (k == 0 || term == 0.0) break;
      const double ratio = static_cast<double>(k) / (static_cast<double>(n - k + 1) * r);
      if (ratio < 1.0 && term * ratio / (1.0 - ratio) < kNegligible * sum.value()) break;
      term *= ratio;
    }
    return sum.value();
  }
  CompensatedSum tail;
  double term = binom_pmf(n, x, p);
  for (std::int64_t k = x;; ++k) {
    tail.add(term);
    if (k == n || term == 0.0) break;
    const double ratio = static_cast<double>(n - k) * r / static_cast<double>(k + 1);
    if (ratio < 1.0 && term * ratio / (1.0 - ratio) < kNegligible * tail.value()) break;
    term *= ratio;
  }
  return 1.0 - tail.value();
}

double normal_cdf(double x) {
  // erfc keeps full relative accuracy for positive arguments, so evaluate the
  // lower tail directly and reflect for x >= 0.
  if (x < 0.0) return 0.5 * std::erfc(-x * std::numbers::sqrt2 * 0.5);
  return 1.0 - 0.5 * std::erfc(x * std::numbers::sqrt2 * 0.5);
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

}  // namespace bercert
