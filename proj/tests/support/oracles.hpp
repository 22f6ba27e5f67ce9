#pragma once

// High-precision reference values and randomized property suites shared by
// the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include <boost/math/special_functions/erf.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "bercert/certify.hpp"
#include "bercert/discrepancy.hpp"
#include "bercert/numerics.hpp"
#include "bercert/tailbounds.hpp"

namespace oracle {

using Real = boost::multiprecision::cpp_bin_float_50;
using Rational = boost::multiprecision::cpp_rational;
using Int = boost::multiprecision::cpp_int;

inline Real normal_cdf(const Real& x) {
  return boost::math::erfc(-x / boost::multiprecision::sqrt(Real(2))) / 2;
}

inline Real normal_pdf(const Real& x) {
  return boost::multiprecision::exp(-x * x / 2) / boost::multiprecision::sqrt(2 * boost::math::constants::pi<Real>());
}

inline Int binomial(std::int64_t n, std::int64_t k) {
  Int c = 1;
  for (std::int64_t j = 1; j <= k; ++j) c = c * (n - k + j) / j;
  return c;
}

/// Exact P(S_n = k) for the binary64 value p.
inline Rational pmf(std::int64_t n, std::int64_t k, double p) {
  const Rational rp(p);
  const Rational rq = Rational(1) - rp;
  Rational out(binomial(n, k));
  for (std::int64_t j = 0; j < k; ++j) out *= rp;
  for (std::int64_t j = k; j < n; ++j) out *= rq;
  return out;
}

/// Exact P(S_n < x).
inline Rational cdf_strict(std::int64_t n, std::int64_t x, double p) {
  Rational s = 0;
  for (std::int64_t k = 0; k < std::min(x, n + 1); ++k) s += pmf(n, k, p);
  return s;
}

struct DeltaRef {
  Real delta;
  std::int64_t k_star = 0;
};

/// Brute-force Kolmogorov distance from exact CDF values.
inline DeltaRef delta_n(std::int64_t n, double p) {
  const Real rp = Real(Rational(p));
  const Real mean = rp * n;
  const Real sigma = boost::multiprecision::sqrt(mean * (1 - rp));
  DeltaRef best{Real(-1), 0};
  Rational F = 0;
  for (std::int64_t i = 0; i <= n; ++i) {
    const Real g = normal_cdf((Real(i) - mean) / sigma);
    const Real f_i = Real(F);
    F += pmf(n, i, p);
    const Real f_next = Real(F);
    const Real d = std::max(boost::multiprecision::abs(f_i - g), boost::multiprecision::abs(f_next - g));
    if (d > best.delta) best = {d, i};
  }
  return best;
}

struct PropertyResult {
  std::string name;
  std::int64_t cases = 0;
  std::int64_t failures = 0;
  double worst = 0.0;  // largest violation or error seen
  bool ok() const { return cases >= 1000 && failures == 0; }
};

inline PropertyResult oracle_delta(std::int64_t cases, std::uint64_t seed) {
  PropertyResult r{"brute-force oracle for delta_n, n <= 60"};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> nd(1, 60);
  std::uniform_real_distribution<double> pd(0.0, 1.0);
  bercert::DiscrepancyEvaluator ev;
  for (std::int64_t c = 0; c < cases; ++c) {
    const std::int64_t n = nd(rng);
    double p = pd(rng);
    if (p == 0.0) p = 0.5;
    const auto rec = ev.evaluate(bercert::BinomialPoint(n, p), bercert::EvalMode::FullRange);
    const DeltaRef ref = delta_n(n, p);
    const double err = std::abs(rec.delta - ref.delta.convert_to<double>());
    r.worst = std::max(r.worst, err);
    ++r.cases;
    if (!(err <= 1e-12)) ++r.failures;
  }
  return r;
}

inline PropertyResult window_equals_full(std::int64_t cases, std::uint64_t seed) {
  PropertyResult r{"restricted window equals full range, 200 < n <= 5000"};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> nd(201, 5000);
  std::uniform_real_distribution<double> pd(bercert::kCentralIntervalLo, 0.5);
  bercert::DiscrepancyEvaluator ev;
  for (std::int64_t c = 0; c < cases; ++c) {
    const bercert::BinomialPoint pt(nd(rng), pd(rng));
    const auto full = ev.evaluate(pt, bercert::EvalMode::FullRange);
    const auto win = ev.evaluate(pt, bercert::EvalMode::RestrictedWindow);
    r.worst = std::max(r.worst, std::abs(full.delta - win.delta));
    ++r.cases;
    if (full.delta != win.delta || full.k_star != win.k_star) ++r.failures;
  }
  return r;
}

inline PropertyResult char_fn_bound(std::int64_t cases, std::uint64_t seed) {
  PropertyResult r{"|f(t)| <= exp(-2pq sin^2(t/2))"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pd(0.0, 1.0);
  std::uniform_real_distribution<double> td(-M_PI, M_PI);
  for (std::int64_t c = 0; c < cases; ++c) {
    double p = pd(rng);
    if (p == 0.0) p = 0.5;
    const double t = td(rng);
    const double s = std::sin(0.5 * t);
    const double excess = bercert::char_fn_modulus(p, t) - std::exp(-2.0 * p * (1.0 - p) * s * s);
    r.worst = std::max(r.worst, excess);
    ++r.cases;
    if (!(excess <= 1e-15)) ++r.failures;
  }
  return r;
}

inline PropertyResult local_bound(std::int64_t cases, std::uint64_t seed) {
  PropertyResult r{"|local deviation| < min(1/(sigma sqrt(2e)), 0.516/sigma^2)"};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> nd(1, 2000);
  std::uniform_real_distribution<double> pd(0.0, 1.0);
  for (std::int64_t c = 0; c < cases; ++c) {
    const std::int64_t n = nd(rng);
    double p = pd(rng);
    if (p == 0.0) p = 0.5;
    std::uniform_int_distribution<std::int64_t> kd(0, n);
    const bercert::BinomialPoint pt(n, p);
    const double s = pt.sigma();
    const double bound = std::min(1.0 / (s * std::sqrt(2.0 * M_E)), 0.516 / (s * s));
    const double v = std::abs(bercert::local_delta(pt, kd(rng)));
    r.worst = std::max(r.worst, v / bound);
    ++r.cases;
    if (!(v < bound)) ++r.failures;
  }
  return r;
}

inline PropertyResult two_sided_lipschitz(std::int64_t cases, std::uint64_t seed) {
  PropertyResult r{"|D_nk(p)/rho(p) - D_nk(p1)/rho(p1)| <= L(p1)(p - p1)"};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> nd(1, 500);
  std::uniform_real_distribution<double> pd(1e-3, 0.5);
  std::uniform_real_distribution<double> wd(0.0, 1.0);
  for (std::int64_t c = 0; c < cases; ++c) {
    const std::int64_t n = nd(rng);
    double p1 = pd(rng);
    double p = pd(rng);
    if (p1 > p) std::swap(p1, p);
    if (p1 == p) continue;
    // Half the cases on short intervals, where the bound is tight.
    if (c % 2 == 0) p = p1 + (p - p1) * 1e-3 * wd(rng);
    if (!(p > p1)) continue;
    std::uniform_int_distribution<std::int64_t> kd(0, n);
    const std::int64_t k = kd(rng);
    const double lhs = std::abs(bercert::delta_nk(bercert::BinomialPoint(n, p), k) / bercert::rho(p) -
                                bercert::delta_nk(bercert::BinomialPoint(n, p1), k) / bercert::rho(p1));
    const double rhs = bercert::lipschitz_L(p1) * (p - p1);
    r.worst = std::max(r.worst, lhs - rhs);
    ++r.cases;
    if (!(lhs <= rhs + 1e-12)) ++r.failures;
  }
  return r;
}

inline double relative_error(double approx, double exact) {
  return std::abs(approx - exact) / std::abs(exact);
}

inline PropertyResult finite_differences(std::int64_t cases, std::uint64_t seed) {
  PropertyResult r{"dF/dp and dG/dp against central differences"};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> nd(2, 400);
  std::uniform_real_distribution<double> pd(0.05, 0.95);
  std::uniform_real_distribution<double> zd(-2.0, 2.0);
  const double h = 1e-6;
  for (std::int64_t c = 0; c < cases; ++c) {
    const std::int64_t n = nd(rng);
    const double p = pd(rng);
    const double mean = n * p;
    const double sigma = std::sqrt(mean * (1.0 - p));
    // Central region: away from it both derivatives are below roundoff of the differences.
    const auto k = std::clamp<std::int64_t>(std::llround(mean + zd(rng) * sigma), 1, n - 1);
    const bool shifted = c % 2 == 1;
    const std::int64_t x = shifted ? k + 1 : k;
    const double fd_F = (bercert::binom_cdf_strict(n, x, p + h) - bercert::binom_cdf_strict(n, x, p - h)) / (2 * h);
    const double e_F = relative_error(fd_F, bercert::dF_dp(n, k, p, shifted));
    auto G = [&](double pp) {
      return bercert::normal_cdf((k - n * pp) / std::sqrt(n * pp * (1.0 - pp)));
    };
    const double fd_G = (G(p + h) - G(p - h)) / (2 * h);
    const double exact_G = bercert::dG_dp(n, static_cast<double>(k), p);
    // dG/dp vanishes at one x; there the relative test is meaningless.
    const double e_G = std::abs(exact_G) > 1e-3 ? relative_error(fd_G, exact_G) : 0.0;
    const double e = std::max(e_F, e_G);
    r.worst = std::max(r.worst, e);
    ++r.cases;
    if (!(e <= 1e-6)) ++r.failures;
  }
  return r;
}

inline PropertyResult monotone_constants(std::int64_t cases, std::uint64_t seed) {
  PropertyResult r{"L, A and L2/rho strictly decreasing on (0, 0.5)"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pd(1e-4, 0.5);
  for (std::int64_t c = 0; c < cases; ++c) {
    double a = pd(rng);
    double b = pd(rng);
    if (a > b) std::swap(a, b);
    if (!(a < b) || b >= 0.5) continue;
    ++r.cases;
    if (!(bercert::lipschitz_L(a) > bercert::lipschitz_L(b)) ||
        !(bercert::A_func(a) > bercert::A_func(b)) ||
        !(bercert::lipschitz_L3(a) > bercert::lipschitz_L3(b))) {
      ++r.failures;
    }
  }
  return r;
}

inline PropertyResult tail_monotone_in_n(std::int64_t cases, std::uint64_t seed) {
  PropertyResult r{"E(p, n) nonincreasing in n"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pd(bercert::kCentralIntervalLo, 0.5);
  std::uniform_int_distribution<std::int64_t> nd(200, 2000000);
  for (std::int64_t c = 0; c < cases; ++c) {
    const double p = pd(rng);
    std::int64_t n1 = nd(rng);
    std::int64_t n2 = nd(rng);
    if (n1 > n2) std::swap(n1, n2);
    if (c % 2 == 0) n2 = n1 + 1;
    const double diff = bercert::E_bound(p, n2) - bercert::E_bound(p, n1);
    r.worst = std::max(r.worst, diff);
    ++r.cases;
    if (!(diff <= 0.0)) ++r.failures;
  }
  return r;
}

}  // namespace oracle
