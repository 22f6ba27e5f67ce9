#include "bercert/tailbounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "bercert/discrepancy.hpp"

namespace bercert {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2Pi = std::sqrt(2.0 * std::numbers::pi);

void require_half_interval(double p, const char* what) {
  if (!(p > 0.0 && p <= 0.5)) {
    std::ostringstream msg;
    msg << what << ": p must lie in (0, 0.5], got " << p;
    throw DomainError(msg.str());
  }
}

void require_n_above_two(std::int64_t n, const char* what) {
  if (n < 3) {
    std::ostringstream msg;
    msg << what << ": n must be >= 3, got " << n;
    throw DomainError(msg.str());
  }
}

TailBoundParams make_params() {
  TailBoundParams t;
  t.gamma = {1.0 / 9.0, 5.0 * kSqrt2Pi / 96.0, 24.0, 7.0 * kSqrt2Pi / 384.0, 192.0 / 14400.0};
  t.gamma_tilde = {2.0 / 3.0, 7.0 / 8.0, 10.0 / 9.0, 11.0 / 8.0, 5.0 / 3.0};
  t.mu = (3.0 * kPi * kPi - 16.0) / (kPi * kPi * kPi * kPi);
  return t;
}

double sigma_of(double p, std::int64_t n) {
  return std::sqrt(static_cast<double>(n) * p * (1.0 - p));
}

}  // namespace

double esseen_constant() {
  return (3.0 + std::sqrt(10.0)) / (6.0 * kSqrt2Pi);
}

const TailBoundParams& tail_params() {
  static const TailBoundParams params = make_params();
  return params;
}

std::vector<std::pair<std::string, double>> audit_entries(const TailBoundParams& t) {
  std::vector<std::pair<std::string, double>> out = {
      {"c1", t.c.c1}, {"c2", t.c.c2}, {"c3", t.c.c3},
  };
  for (std::size_t i = 0; i < t.gamma.size(); ++i) {
    out.emplace_back("gamma_" + std::to_string(i + 6), t.gamma[i]);
  }
  for (std::size_t i = 0; i < t.gamma_tilde.size(); ++i) {
    out.emplace_back("gamma_tilde_" + std::to_string(i + 6), t.gamma_tilde[i]);
  }
  out.emplace_back("e5", t.e5);
  out.emplace_back("A1", t.A1);
  out.emplace_back("A2", t.A2);
  out.emplace_back("A3", t.A3);
  out.emplace_back("mu", t.mu);
  out.emplace_back("chi_threshold", t.chi_threshold);
  return out;
}

OmegaSet omega_set(double p) {
  require_half_interval(p, "omega_set");
  const double q = 1.0 - p;
  const double pq = p * q;
  const auto& t = tail_params();
  OmegaSet w;
  w.omega = p * p + q * q;
  w.omega3 = q - p;
  w.omega4 = std::abs(q * q * q + p * p * p - 3.0 * pq);
  w.omega5 = q * q * q * q - p * p * p * p;
  w.omega6 = std::pow(q, 5) + std::pow(p, 5) + 15.0 * pq * pq;
  w.omega5_tilde = std::pow(p, 4) + std::pow(q, 4) + 120.0 * t.e5 * std::pow(pq, 1.5);
  w.V[0] = w.omega3 * w.omega3;
  w.V[1] = w.omega3 * w.omega4;
  w.V[2] = 2.0 * w.omega5_tilde * w.omega3 / (120.0 * 6.0) + std::pow(w.omega4 / 24.0, 2);
  w.V[3] = w.omega5_tilde * w.omega4;
  w.V[4] = w.omega5_tilde * w.omega5_tilde;
  w.zeta = std::pow(w.omega / 6.0, 2.0 / 3.0);
  return w;
}

double A_k(int k, std::int64_t n) {
  require_n_above_two(n, "A_k");
  const double nd = static_cast<double>(n);
  return std::pow(nd / (nd - 2.0), 0.5 * k) * (nd - 1.0) / nd;
}

double e_factor(double p, std::int64_t n) {
  const OmegaSet w = omega_set(p);
  const double s = sigma_of(p, n);
  return std::exp(1.0 / (24.0 * std::cbrt(s * s) * w.zeta * w.zeta));
}

double chi(double p, std::int64_t n) {
  const OmegaSet w = omega_set(p);
  if (p >= tail_params().chi_threshold) return 0.0;
  const double s = sigma_of(p, n);
  return 2.0 * w.zeta / std::cbrt(s * s);
}

void require_remainder_domain(double p, std::int64_t n) {
  if (n < 200 || !(p <= 0.5) || !(p * static_cast<double>(n) >= 4.0)) {
    std::ostringstream msg;
    msg << "remainder bound requires n >= 200 and 4/n <= p <= 0.5, got n = " << n
        << ", p = " << p;
    throw PreconditionError(msg.str());
  }
}

double K1(double p, std::int64_t n) {
  require_remainder_domain(p, n);
  const OmegaSet w = omega_set(p);
  const double nd = static_cast<double>(n);
  const double s = sigma_of(p, n);
  const double ratio = nd / (nd - 1.0);
  return w.omega3 / (4.0 * s * kSqrt2Pi * (nd - 1.0)) * (1.0 + 1.0 / (4.0 * (nd - 1.0))) +
         w.omega4 / (12.0 * s * s * kPi) * ratio * ratio +
         w.omega5 / (40.0 * std::pow(s, 3) * kSqrt2Pi) * std::pow(ratio, 2.5) +
         w.omega6 / (90.0 * std::pow(s, 4) * kPi) * std::pow(ratio, 3);
}

double K2(double p, std::int64_t n) {
  require_remainder_domain(p, n);
  const auto& t = tail_params();
  const OmegaSet w = omega_set(p);
  const double nd = static_cast<double>(n);
  const double s = sigma_of(p, n);
  const double e = e_factor(p, n);
  double sum = 0.0;
  double s_pow = 1.0;
  for (int j = 1; j <= 5; ++j) {
    s_pow *= s;
    const auto idx = static_cast<std::size_t>(j - 1);
    const double bracket = 1.0 + t.gamma_tilde[idx] * e * nd / (s * s * (nd - 2.0));
    sum += t.gamma[idx] * A_k(j + 5, n) * w.V[idx] / s_pow * bracket;
  }
  return sum / (kPi * s);
}

double K3(double p, std::int64_t n) {
  require_remainder_domain(p, n);
  const auto& t = tail_params();
  const OmegaSet w = omega_set(p);
  const double s = sigma_of(p, n);
  const double s2 = s * s;
  const double s23 = std::cbrt(s2);
  const double mu = t.mu;
  double sum = 1.0 / (12.0 * s2);
  sum += (1.0 / 36.0 + mu / 8.0) / std::pow(s, 4);
  sum += (std::exp(t.A1 / 6.0) / 36.0 + mu / 8.0) / std::pow(s, 6);
  sum += 5.0 * mu / 24.0 * std::exp(t.A2 / 6.0) / std::pow(s, 8);
  sum += std::exp(-s * std::sqrt(t.A1) + t.A1 / 6.0) / 3.0;
  sum += (kPi - 2.0) * mu * std::exp(-s * std::sqrt(t.A2) + t.A2 / 6.0);
  sum += std::exp(-s * std::sqrt(t.A3) + t.A3 / 6.0) * 0.25 *
         std::log(std::pow(kPi, 4) * s2 / (4.0 * t.A3));
  sum += std::exp(-s23 / (2.0 * w.zeta)) *
         (2.0 * w.zeta / s23 +
          std::exp(t.A3 / 6.0) * (1.0 + chi(p, n)) / (24.0 * w.zeta * s23 * s23));
  return sum / kPi;
}

double R(double p, std::int64_t n) {
  return K1(p, n) + K2(p, n) + K3(p, n);
}

double R0(double p, std::int64_t n) {
  return std::sqrt(static_cast<double>(n)) * R(p, n) / rho(p);
}

double E_bound(double p, std::int64_t n) {
  require_remainder_domain(p, n);
  return script_E(p) + R0(p, n);
}

double G2(double p, std::int64_t n) {
  require_half_interval(p, "G2");
  require_n_above_two(n, "G2");
  const double q = 1.0 - p;
  const double nd = static_cast<double>(n);
  const double ratio = nd / (nd - 1.0);
  return 3.0 * std::abs(q * q * q + p * p * p - 3.0 * p * q) * ratio * ratio +
         4.0 * A_k(6, n) * (q - p) * (q - p) + 3.0;
}

double G2_limit(double p) {
  require_half_interval(p, "G2_limit");
  const double kink = (3.0 - std::sqrt(3.0)) / 6.0;
  if (p <= kink) return 2.0 * (17.0 * p * p - 17.0 * p + 5.0);
  return -2.0 * (p * p - p - 2.0);
}

double D2_coeff(double p, std::int64_t n) {
  return G2(p, n) / (36.0 * kPi);
}

double D2_bar(double p, std::int64_t n) {
  const double s = sigma_of(p, n);
  return s * s * R(p, n);
}

double B_func(double p, std::int64_t n) {
  require_half_interval(p, "B_func");
  require_n_above_two(n, "B_func");
  const OmegaSet w = omega_set(p);
  const double nd = static_cast<double>(n);
  const double s = sigma_of(p, n);
  const double ratio = nd / (nd - 1.0);
  const double inner = w.omega4 * ratio * ratio +
                       12.0 * tail_params().gamma[0] * A_k(6, n) * w.V[0] + 1.0;
  return script_E(p) + inner / (12.0 * kPi * w.omega * s);
}

double normal_plus_d_bound(double p, std::int64_t n, double d) {
  require_half_interval(p, "normal_plus_d_bound");
  if (n < 1) throw DomainError("normal_plus_d_bound: n must be >= 1");
  const double q = 1.0 - p;
  return script_E(p) + d / (sigma_of(p, n) * (p * p + q * q));
}

double simplified_remainder_bound(double p, std::int64_t n) {
  if (!(p >= kCentralIntervalLo && p <= 0.5)) {
    std::ostringstream msg;
    msg << "simplified remainder bound requires p in [0.1689, 0.5], got " << p;
    throw PreconditionError(msg.str());
  }
  return normal_plus_d_bound(p, n, kSimplifiedRemainderConstant);
}

double neammanee_T_bound(double p, std::int64_t n) {
  require_half_interval(p, "neammanee_T_bound");
  const double s = sigma_of(p, n);
  if (!(s * s >= 100.0)) {
    std::ostringstream msg;
    msg << "Neammanee bound requires sigma^2 >= 100, got " << s * s;
    throw PreconditionError(msg.str());
  }
  return normal_plus_d_bound(p, n, kNeammaneeConstant);
}

const char* to_string(SmallPVariant v) {
  switch (v) {
    case SmallPVariant::KS2010: return "ks2010";
    case SmallPVariant::Shv2013a: return "shv2013a";
    case SmallPVariant::Shv2013b: return "shv2013b";
  }
  return "unknown";
}

SmallPVariant parse_small_p_variant(const std::string& name) {
  if (name == "ks2010") return SmallPVariant::KS2010;
  if (name == "shv2013a") return SmallPVariant::Shv2013a;
  if (name == "shv2013b") return SmallPVariant::Shv2013b;
  throw DomainError("unknown small-p variant '" + name + "' (expected ks2010, shv2013a, shv2013b)");
}

std::pair<double, double> small_p_coefficients(SmallPVariant variant) {
  switch (variant) {
    case SmallPVariant::KS2010: return {0.33477, 0.429};
    case SmallPVariant::Shv2013a: return {0.33554, 0.415};
    case SmallPVariant::Shv2013b: return {0.3328, 0.429};
  }
  throw DomainError("small_p_T_bound: unknown variant");
}

double small_p_T_bound(double p, SmallPVariant variant) {
  require_half_interval(p, "small_p_T_bound");
  const auto [coeff, add] = small_p_coefficients(variant);
  return coeff * (1.0 + add / rho(p));
}

double small_p_crossing(SmallPVariant variant, double target, double tol) {
  double lo = 1e-12;
  double hi = 0.5;
  if (small_p_T_bound(hi, variant) <= target) return hi;
  if (small_p_T_bound(lo, variant) > target) return 0.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (small_p_T_bound(mid, variant) <= target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

double uspensky_error_bound(const BinomialPoint& point) {
  const double s = point.sigma();
  if (!(s * s >= 25.0)) {
    std::ostringstream msg;
    msg << "uspensky_error_bound requires sigma^2 >= 25, got " << s * s;
    throw PreconditionError(msg.str());
  }
  return (0.13 + 0.18 * std::abs(point.p() - point.q())) / (s * s) + std::exp(-1.5 * s);
}

double uspensky_x_plus(const BinomialPoint& point, double x) {
  return (x - point.mean() + 0.5) / point.sigma();
}

double uspensky_x_minus(const BinomialPoint& point, double x) {
  return (x - point.mean() - 0.5) / point.sigma();
}

double edgeworth_G(const BinomialPoint& point, double x) {
  const double corr = (point.q() - point.p()) / (6.0 * kSqrt2Pi * point.sigma());
  return normal_cdf(x) + corr * (1.0 - x * x) * std::exp(-0.5 * x * x);
}

double uspensky_interval_approx(const BinomialPoint& point, std::int64_t a, std::int64_t b) {
  if (!(a < b)) throw DomainError("uspensky_interval_approx: need a < b");
  return edgeworth_G(point, uspensky_x_plus(point, static_cast<double>(b))) -
         edgeworth_G(point, uspensky_x_minus(point, static_cast<double>(a)));
}

Maximum maximize_on_interval(const std::function<double(double)>& f, double a, double b,
                             int nodes, double tol) {
  if (!(a < b) || nodes < 2) throw DomainError("maximize_on_interval: need a < b and nodes >= 2");
  const double h = (b - a) / nodes;
  auto node = [&](int j) { return j == nodes ? b : a + j * h; };
  Maximum best{f(a), a};
  int best_j = 0;
  for (int j = 1; j <= nodes; ++j) {
    const double x = node(j);
    const double v = f(x);
    if (v > best.value) {
      best = {v, x};
      best_j = j;
    }
  }
  double lo = node(std::max(0, best_j - 1));
  double hi = node(std::min(nodes, best_j + 1));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    }
  }
  for (const auto& [x, v] : {std::pair{x1, f1}, std::pair{x2, f2}}) {
    if (v > best.value) best = {v, x};
  }
  return best;
}

Table2Cell table2_cell(double p_lo, std::int64_t N, double p_hi) {
  Table2Cell cell;
  cell.p_lo = p_lo;
  cell.p_hi = p_hi;
  cell.N = N;
  cell.d2 = maximize_on_interval([N](double p) { return D2_coeff(p, N); }, p_lo, p_hi);
  cell.d2bar = maximize_on_interval([N](double p) { return D2_bar(p, N); }, p_lo, p_hi);
  return cell;
}

std::vector<Table2Cell> default_table2() {
  return {table2_cell(0.02, 200), table2_cell(kCentralIntervalLo, 200),
          table2_cell(kCentralIntervalLo, 500000)};
}

}  // namespace bercert
