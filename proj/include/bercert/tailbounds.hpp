#pragma once

// Closed-form majorants of the normalized discrepancy that hold for all n
// beyond a threshold, plus the n-free bounds used for small p.
//
// The remainder R(p,n) = K1 + K2 + K3 bounds delta_n(p) - rho(p) E(p)/sqrt(n)
// for 4/n <= p <= 0.5 and n >= 200, and R0 = sqrt(n) R / rho is
// nonincreasing in n. All constants live in one TailBoundParams record.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "bercert/certify.hpp"
#include "bercert/numerics.hpp"

namespace bercert {

/// (3 + sqrt(10)) / (6 sqrt(2 pi)), the asymptotically exact lower bound.
double esseen_constant();

struct TailBoundParams {
  LipschitzConstants c{};
  // gamma_6 .. gamma_10 and their companions.
  std::array<double, 5> gamma{};
  std::array<double, 5> gamma_tilde{};
  double e5 = 0.0277905;
  double A1 = 5.405;
  double A2 = 7.521;
  double A3 = 5.233;
  double mu = 0.0;
  double chi_threshold = 0.085;
};

/// The fixed constant record. Immutable.
const TailBoundParams& tail_params();

/// Named (key, value) pairs of every constant, for audit output.
std::vector<std::pair<std::string, double>> audit_entries(const TailBoundParams& params);

/// Moment polynomials of the centered Bernoulli law at p.
struct OmegaSet {
  double omega = 0.0;        // p^2 + q^2
  double omega3 = 0.0;       // q - p
  double omega4 = 0.0;       // |q^3 + p^3 - 3pq|
  double omega5 = 0.0;       // q^4 - p^4
  double omega6 = 0.0;       // q^5 + p^5 + 15 (pq)^2
  double omega5_tilde = 0.0; // p^4 + q^4 + 5! e5 (pq)^{3/2}
  std::array<double, 5> V{}; // V6 .. V10
  double zeta = 0.0;         // (omega/6)^{2/3}
};

OmegaSet omega_set(double p);

/// (n/(n-2))^{k/2} (n-1)/n.
double A_k(int k, std::int64_t n);

/// exp(1 / (24 sigma^{2/3} zeta^2)).
double e_factor(double p, std::int64_t n);

/// 2 zeta / sigma^{2/3} below the chi threshold, zero above.
double chi(double p, std::int64_t n);

/// Throws PreconditionError unless n >= 200 and 4/n <= p <= 0.5.
void require_remainder_domain(double p, std::int64_t n);

double K1(double p, std::int64_t n);
double K2(double p, std::int64_t n);
double K3(double p, std::int64_t n);
double R(double p, std::int64_t n);

/// sqrt(n) R(p,n) / rho(p).
double R0(double p, std::int64_t n);

/// script_E(p) + R0(p,n): bounds T_n(p) and is nonincreasing in n.
double E_bound(double p, std::int64_t n);

/// 3|q^3+p^3-3pq| (n/(n-1))^2 + 4 A_6(n) (q-p)^2 + 3.
double G2(double p, std::int64_t n);

/// Limit of G2(p,n) as n -> infinity (piecewise quadratic).
double G2_limit(double p);

/// Coefficient of 1/sigma^2 in R(p,n): G2(p,n)/(36 pi).
double D2_coeff(double p, std::int64_t n);

/// sigma^2 R(p,n).
double D2_bar(double p, std::int64_t n);

/// script_E(p) + [omega4 (n/(n-1))^2 + 12 gamma_6 A_6(n) V_6 + 1]/(12 pi omega sigma):
/// the principal part of E_bound.
double B_func(double p, std::int64_t n);

/// script_E(p) + d/(sigma (p^2+q^2)): a 1/sigma^2 discrepancy bound with
/// constant d on the T scale.
double normal_plus_d_bound(double p, std::int64_t n, double d);

inline constexpr double kSimplifiedRemainderConstant = 0.05532;
inline constexpr double kNeammaneeConstant = 0.1618;
inline constexpr double kCentralIntervalLo = 0.1689;

/// normal_plus_d_bound with d = 0.05532; p in [0.1689, 0.5].
double simplified_remainder_bound(double p, std::int64_t n);

/// normal_plus_d_bound with d = 0.1618; requires sigma^2 >= 100.
double neammanee_T_bound(double p, std::int64_t n);

enum class SmallPVariant { KS2010, Shv2013a, Shv2013b };

const char* to_string(SmallPVariant v);
SmallPVariant parse_small_p_variant(const std::string& name);

/// T_n(p) <= coeff (1 + add/rho(p)) for all n; increasing in p on (0, 0.5].
double small_p_T_bound(double p, SmallPVariant variant);

/// (coeff, add) of a variant.
std::pair<double, double> small_p_coefficients(SmallPVariant variant);

/// Largest b in (0, 0.5] with small_p_T_bound(b) <= target, by bisection.
double small_p_crossing(SmallPVariant variant, double target, double tol = 1e-10);

/// Right side (0.13 + 0.18|p-q|)/sigma^2 + exp(-3 sigma/2) of the classical
/// local-expansion error bound. Requires sigma^2 >= 25.
double uspensky_error_bound(const BinomialPoint& point);

/// (x - np +/- 1/2)/sigma.
double uspensky_x_plus(const BinomialPoint& point, double x);
double uspensky_x_minus(const BinomialPoint& point, double x);

/// Phi(x) + (q-p)/(6 sqrt(2 pi) sigma) (1 - x^2) exp(-x^2/2).
double edgeworth_G(const BinomialPoint& point, double x);

/// G(x_plus(b)) - G(x_minus(a)), the continuity-corrected approximation of
/// P(a <= S_n <= b). The half-unit shifts widen [a, b].
double uspensky_interval_approx(const BinomialPoint& point, std::int64_t a, std::int64_t b);

struct Maximum {
  double value = 0.0;
  double argmax = 0.0;
};

/// Maximum of f on [a, b]: best node of a uniform bracketing grid, refined by
/// golden-section search on the bracket around it to `tol` in p.
Maximum maximize_on_interval(const std::function<double(double)>& f, double a, double b,
                             int nodes = 10000, double tol = 1e-9);

/// One cell of the D2 / D2_bar table: maxima over p in [p_lo, p_hi] at n = N.
struct Table2Cell {
  double p_lo = 0.0;
  double p_hi = 0.5;
  std::int64_t N = 0;
  Maximum d2;
  Maximum d2bar;
};

Table2Cell table2_cell(double p_lo, std::int64_t N, double p_hi = 0.5);

/// The three published columns: ([0.02,0.5], 200), ([0.1689,0.5], 200),
/// ([0.1689,0.5], 500000).
std::vector<Table2Cell> default_table2();

}  // namespace bercert
