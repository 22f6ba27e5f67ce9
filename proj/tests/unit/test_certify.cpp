#include "doctest.h"

#include <cmath>
#include <random>

#include "bercert/certify.hpp"
#include "bercert/discrepancy.hpp"
#include "oracles.hpp"

using namespace bercert;

TEST_CASE("Lipschitz modulus values") {
  const double L = lipschitz_L(0.1689);
  CHECK(std::abs(L - 12.971769841099794187) < 1e-12);
  CHECK(L < 12.98);
  CHECK(lipschitz_L(0.5) == doctest::Approx(4.0 * (1.032 + 0.121)).epsilon(1e-15));
  CHECK_THROWS_AS(lipschitz_L(0.0), DomainError);
  CHECK_THROWS_AS(lipschitz_L(0.51), DomainError);
}

TEST_CASE("L1 and L2") {
  CHECK(lipschitz_L1(0.5) == doctest::Approx(4.612).epsilon(1e-15));
  CHECK(lipschitz_L2(0.5) == doctest::Approx(4.612).epsilon(1e-15));
  CHECK(lipschitz_L2(0.25) / lipschitz_L1(0.25) > 1.0);
  CHECK(std::abs(lipschitz_L2(0.1689) - 22.625910384503293567) < 1e-12);
  for (double p = 0.01; p <= 0.5; p += 0.01) CHECK(lipschitz_L1(p) <= lipschitz_L2(p));
}

TEST_CASE("A and its finite-difference origin") {
  CHECK(std::abs(A_func(0.3) - 3.6845351264578976272) < 1e-12);
  const double h = 1e-6;
  const double fd = (2.0 / rho(0.3 + h) - 2.0 / rho(0.3 - h)) / (2.0 * h);
  CHECK(std::abs(fd / A_func(0.3) - 1.0) < 1e-6);
  CHECK(A_func(0.2) > A_func(0.3));
  CHECK(A_func(0.5 - 1e-9) < 1e-7);
  CHECK_THROWS_AS(A_func(0.5), DomainError);
}

TEST_CASE("identity L = L2/rho + c3 A") {
  for (double p = 0.005; p < 0.5; p += 0.005) {
    const double rhs = lipschitz_L2(p) / rho(p) + kLipschitz.c3 * A_func(p);
    CHECK(std::abs(lipschitz_L(p) - rhs) <= 1e-13 * lipschitz_L(p));
    CHECK(lipschitz_L3(p) == doctest::Approx(lipschitz_L2(p) / rho(p)).epsilon(1e-14));
  }
}

TEST_CASE("monotone constants") {
  CHECK(oracle::monotone_constants(2000, 4).failures == 0);
}

TEST_CASE("derivatives in p") {
  CHECK(dF_dp(20, 0, 0.3, false) == 0.0);
  CHECK(dF_dp(20, 20, 0.3, true) == 0.0);
  const double h = 1e-6;
  const double fd = (binom_cdf_strict(20, 7, 0.3 + h) - binom_cdf_strict(20, 7, 0.3 - h)) / (2 * h);
  CHECK(std::abs(fd / dF_dp(20, 7, 0.3, false) - 1.0) < 1e-6);
  const double fd1 = (binom_cdf_strict(20, 8, 0.3 + h) - binom_cdf_strict(20, 8, 0.3 - h)) / (2 * h);
  CHECK(std::abs(fd1 / dF_dp(20, 7, 0.3, true) - 1.0) < 1e-6);

  auto G = [](double p) { return normal_cdf((7.0 - 20.0 * p) / std::sqrt(20.0 * p * (1.0 - p))); };
  const double fdg = (G(0.3 + h) - G(0.3 - h)) / (2 * h);
  CHECK(std::abs(fdg / dG_dp(20, 7.0, 0.3) - 1.0) < 1e-6);

  // numerator x(1-2p) + np vanishes at x = np/(2p-1)
  const double root = 20.0 * 0.3 / (2.0 * 0.3 - 1.0);
  CHECK(std::abs(dG_dp(20, root, 0.3)) < 1e-15);

  const double sigma = std::sqrt(100.0 * 0.25);
  CHECK(dG_dp(100, 50.0, 0.5) == doctest::Approx(-50.0 / (0.5 * sigma) * normal_pdf(0.0)).epsilon(1e-14));
  CHECK_THROWS_AS(dF_dp(20, 21, 0.3, false), DomainError);
}

TEST_CASE("finite differences on a sample") {
  CHECK(oracle::finite_differences(500, 6).failures == 0);
}

TEST_CASE("two-sided Lipschitz property") {
  CHECK(oracle::two_sided_lipschitz(1000, 7).failures == 0);
}

TEST_CASE("grid certificate") {
  const GridCertificate c = certify_interval(200, 0.4, 0.1689, 1e-6);
  CHECK(c.certified_bound == c.grid_max + c.slack);
  CHECK(std::abs(c.slack - 9.1724264186328081e-5) < 1e-18);
  CHECK(c.slack < 9.2e-5);

  const GridCertificate big = certify_interval(500000, 0.4, 0.1689, 1e-12);
  CHECK(big.slack < 4.6e-9);

  CHECK(certify_interval(1000, 0.3, 0.2, 1e-300).certified_bound == doctest::Approx(0.3));
  CHECK_THROWS_AS(certify_interval(10, 0.3, 0.2, 0.0), DomainError);
  CHECK_THROWS_AS(certify_interval(10, 0.3, 0.2, -1.0), DomainError);
  CHECK_THROWS_AS(certify_interval(10, 0.3, 0.5, 1e-3), DomainError);
  CHECK_THROWS_AS(certify_interval(10, 0.3, 0.0, 1e-3), DomainError);
}

TEST_CASE("interpolation soundness off the grid") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::int64_t> nd(1, 500);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  DiscrepancyEvaluator ev;
  for (int c = 0; c < 200; ++c) {
    const std::int64_t n = nd(rng);
    const double h = 1e-3;
    const double p_lo = 0.1689;
    const double a = p_lo + std::floor(ud(rng) * 300.0) * h;
    const double b = a + h;
    const double p = a + ud(rng) * h;
    const double ta = ev.t_value(n, a);
    const double tb = ev.t_value(n, b);
    const double tp = ev.t_value(n, p);
    CHECK(tp <= certify_interval(n, std::max(ta, tb), p_lo, h).certified_bound);
    CHECK(tp <= cell_bound(n, a, b, ta, tb));
  }
}

TEST_CASE("cell refinement") {
  DiscrepancyEvaluator ev;
  const std::int64_t n = 150;
  auto t = [&](double p) { return ev.t_value(n, p); };
  const double a = 0.40;
  const double b = 0.41;
  const double ta = t(a);
  const double tb = t(b);
  const double coarse = cell_bound(n, a, b, ta, tb);
  const CellRefinement r = refine_cell(n, a, b, ta, tb, t, 0.4095, 40);
  CHECK(r.bound <= coarse);
  CHECK(r.bound < 0.4095);
  CHECK(r.evaluations > 0);
  CHECK(r.max_seen <= r.bound);
  // deterministic
  const CellRefinement again = refine_cell(n, a, b, ta, tb, t, 0.4095, 40);
  CHECK(again.bound == r.bound);
  CHECK(again.evaluations == r.evaluations);
  // an endpoint above target stops subdivision at once
  const CellRefinement futile = refine_cell(n, a, b, ta, tb, t, std::min(ta, tb), 40);
  CHECK(futile.evaluations == 0);
  CHECK(futile.bound == coarse);
}
