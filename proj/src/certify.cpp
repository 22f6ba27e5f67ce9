#include "bercert/certify.hpp"

#include <cmath>
#include <sstream>

#include "bercert/discrepancy.hpp"

namespace bercert {

namespace {

void require_half_interval(double p, const char* what) {
  if (!(p > 0.0 && p <= 0.5)) {
    std::ostringstream msg;
    msg << what << ": p must lie in (0, 0.5], got " << p;
    throw DomainError(msg.str());
  }
}

}  // namespace

double lipschitz_L(double p) {
  require_half_interval(p, "lipschitz_L");
  const auto& c = kLipschitz;
  const double q = 1.0 - p;
  const double pq = p * q;
  const double w = 1.0 - 2.0 * pq;
  const double inner = c.c1 / p + c.c2 + c.c3 * (1.0 - 2.0 * p) * (1.0 + 2.0 * pq) / w;
  return inner / (w * std::sqrt(pq));
}

double lipschitz_L1(double p) {
  require_half_interval(p, "lipschitz_L1");
  const double q = 1.0 - p;
  return (kLipschitz.c1 / q + kLipschitz.c2) / (p * q);
}

double lipschitz_L2(double p) {
  require_half_interval(p, "lipschitz_L2");
  const double q = 1.0 - p;
  return (kLipschitz.c1 / p + kLipschitz.c2) / (p * q);
}

double lipschitz_L3(double p) {
  require_half_interval(p, "lipschitz_L3");
  const double q = 1.0 - p;
  const double pq = p * q;
  return (kLipschitz.c1 + kLipschitz.c2 * p) / (p * std::sqrt(pq) * (1.0 - 2.0 * pq));
}

double A_func(double p) {
  if (!(p > 0.0 && p < 0.5)) {
    std::ostringstream msg;
    msg << "A_func: p must lie in (0, 0.5), got " << p;
    throw DomainError(msg.str());
  }
  const double q = 1.0 - p;
  const double pq = p * q;
  const double w = 1.0 - 2.0 * pq;
  return (1.0 - 2.0 * p) * (1.0 + 2.0 * pq) / (std::sqrt(pq) * w * w);
}

double dF_dp(std::int64_t n, std::int64_t k, double p, bool shifted) {
  if (n < 1 || k < 0 || k > n) {
    std::ostringstream msg;
    msg << "dF_dp: need 0 <= k <= n with n >= 1, got n = " << n << ", k = " << k;
    throw DomainError(msg.str());
  }
  detail::require_probability(p, "dF_dp");
  if (shifted) {
    if (k == n) return 0.0;
    return -(static_cast<double>(n - k) / (1.0 - p)) * binom_pmf(n, k, p);
  }
  if (k == 0) return 0.0;
  return -(static_cast<double>(k) / p) * binom_pmf(n, k, p);
}

double dG_dp(std::int64_t n, double x, double p) {
  if (n < 1 || !std::isfinite(x)) throw DomainError("dG_dp: need n >= 1 and finite x");
  detail::require_probability(p, "dG_dp");
  const double q = 1.0 - p;
  const double np = static_cast<double>(n) * p;
  const double s = std::sqrt(np * q);
  return -(x * (1.0 - 2.0 * p) + np) / (2.0 * p * q * s) * normal_pdf((x - np) / s);
}

GridCertificate certify_interval(std::int64_t n, double grid_max, double p_lo, double h,
                                 double p_hi) {
  if (n < 1) throw DomainError("certify_interval: n must be >= 1");
  if (!(h > 0.0) || !std::isfinite(h)) {
    std::ostringstream msg;
    msg << "certify_interval: step must be positive, got " << h;
    throw DomainError(msg.str());
  }
  if (!(p_lo > 0.0 && p_lo < 0.5)) {
    std::ostringstream msg;
    msg << "certify_interval: p_lo must lie in (0, 0.5), got " << p_lo;
    throw DomainError(msg.str());
  }
  if (!(p_hi > p_lo && p_hi <= 0.5)) {
    std::ostringstream msg;
    msg << "certify_interval: p_hi must lie in (p_lo, 0.5], got " << p_hi;
    throw DomainError(msg.str());
  }
  GridCertificate cert;
  cert.n = n;
  cert.p_lo = p_lo;
  cert.p_hi = p_hi;
  cert.step = h;
  cert.grid_max = grid_max;
  cert.slack = std::sqrt(static_cast<double>(n)) * (0.5 * h) * lipschitz_L(p_lo);
  cert.certified_bound = grid_max + cert.slack;
  return cert;
}

double cell_bound(std::int64_t n, double a, double b, double t_a, double t_b) {
  if (!(a < b)) throw DomainError("cell_bound: need a < b");
  return 0.5 * (t_a + t_b) + std::sqrt(static_cast<double>(n)) * lipschitz_L(a) * (0.5 * (b - a));
}

}  // namespace bercert
