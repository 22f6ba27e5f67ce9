#pragma once

// Special functions and binomial probabilities shared by every other module.
// Everything here is a pure function of its arguments and runs in binary64.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace bercert {

/// Raised when an argument lies outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when a documented precondition (validity range of a bound,
/// evaluation-mode restriction, ...) is violated.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Accuracy targets the numerics are built and tested against.
struct PrecisionPolicy {
  double pmf_rel_tol = 1e-13;
  double cdf_abs_tol = 1e-14;
  double phi_abs_tol = 1e-15;
};

inline constexpr PrecisionPolicy kDefaultPrecision{};

/// Number of trials n and success probability p of a binomial law.
/// q = 1 - p is computed once at construction and reused everywhere.
class BinomialPoint {
 public:
  BinomialPoint(std::int64_t n, double p);

  std::int64_t n() const { return n_; }
  double p() const { return p_; }
  double q() const { return q_; }
  double mean() const { return mean_; }
  double sigma() const { return sigma_; }

 private:
  std::int64_t n_;
  double p_;
  double q_;
  double mean_;
  double sigma_;
};

/// Neumaier's variant of Kahan summation. Order of add() calls is the only
/// thing that determines the result, so a fixed order gives bit-stable sums.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Stirling-series error ln(n!) - [(n+1/2)ln n - n + ln sqrt(2 pi)].
double stirling_error(std::int64_t n);

/// Deviance term x ln(x/np) + np - x, accurate when x is close to np.
double binomial_deviance(double x, double np);

/// ln[C(n,k) p^k q^(n-k)] via the saddle-point expansion (no factorials).
double log_binom_pmf(std::int64_t n, std::int64_t k, double p);

/// C(n,k) p^k q^(n-k).
double binom_pmf(std::int64_t n, std::int64_t k, double p);

/// P(S_n < x) for S_n ~ Bin(n, p): the left-continuous distribution function.
/// Summed from the smaller tail with compensated accumulation.
double binom_cdf_strict(std::int64_t n, std::int64_t x, double p);

/// Standard normal distribution function.
double normal_cdf(double x);

/// Standard normal density.
double normal_pdf(double x);

namespace detail {
void require_probability(double p, const char* what);
}  // namespace detail

}  // namespace bercert
