#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "bercert/checkpoint.hpp"
#include "bercert/discrepancy.hpp"
#include "bercert/report_io.hpp"
#include "bercert/scan.hpp"

using namespace bercert;

namespace {

ScanSpec small_spec() {
  ScanSpec s;
  s.n_lo = 1;
  s.n_hi = 300;
  s.step = 5e-3;
  s.checkpoint_every = 16;
  return s;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("bercert_test_" + name);
}

std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("spec validation") {
  ScanSpec s = small_spec();
  CHECK_NOTHROW(validate(s));
  s.step = 0.0;
  CHECK_THROWS_AS(validate(s), SpecError);
  s = small_spec();
  s.n_lo = 0;
  CHECK_THROWS_AS(validate(s), SpecError);
  s = small_spec();
  s.n_hi = 0;
  CHECK_THROWS_AS(validate(s), SpecError);
  s = small_spec();
  s.p_hi = 0.6;
  CHECK_THROWS_AS(validate(s), SpecError);
  s = small_spec();
  s.p_lo = 0.4;
  s.p_hi = 0.3;
  CHECK_THROWS_AS(validate(s), SpecError);
  s = small_spec();
  s.workers = 0;
  CHECK_THROWS_AS(validate(s), SpecError);

  ScanSpec full_scale;
  full_scale.n_hi = 500000;
  full_scale.step = 1e-12;
  CHECK(is_long_running(full_scale));
  CHECK_FALSE(is_long_running(small_spec()));
}

TEST_CASE("grid nodes from integer index") {
  ScanSpec s;
  s.p_lo = 0.1689;
  s.p_hi = 0.5;
  s.step = 1e-6;
  const std::int64_t m = grid_cells(s);
  CHECK(m == 331100);
  CHECK(grid_node(s, 0) == 0.1689);
  CHECK(grid_node(s, m) == 0.5);
  CHECK(grid_node(s, 12345) == 0.1689 + 12345.0 * 1e-6);
  CHECK(grid_node(s, m - 1) < 0.5);
  for (std::int64_t j = 1; j <= m; j += 997) CHECK(grid_node(s, j) > grid_node(s, j - 1));

  s.step = 0.3;  // last cell shorter than the step
  CHECK(grid_cells(s) == 2);
  CHECK(grid_node(s, 2) == 0.5);
  s.p_lo = s.p_hi = 0.5;
  CHECK(grid_cells(s) == 0);
}

TEST_CASE("single two-point record") {
  ScanSpec s;
  s.n_lo = s.n_hi = 1;
  s.p_lo = s.p_hi = 0.5;
  const ScanReport r = scan_range(s);
  REQUIRE(r.per_n.size() == 1);
  CHECK(r.per_n[0].n == 1);
  CHECK(r.per_n[0].p_argmax == 0.5);
  CHECK(std::abs(r.per_n[0].t_max - 0.34134474606854294859) < 1e-15);
  CHECK(r.complete);
}

TEST_CASE("report invariants and worker independence") {
  ScanSpec s = small_spec();
  s.workers = 1;
  const ScanReport one = scan_range(s);
  s.workers = 8;
  const ScanReport eight = scan_range(s);
  CHECK(report_body_json(one) == report_body_json(eight));

  REQUIRE(one.per_n.size() == 300);
  double gc = 0.0;
  for (std::size_t i = 0; i < one.per_n.size(); ++i) {
    const PerNResult& r = one.per_n[i];
    CHECK(r.n == static_cast<std::int64_t>(i) + 1);
    CHECK(r.t_max <= r.refined_bound);
    CHECK(r.refined_bound <= r.certified_bound);
    gc = std::max(gc, r.certified_bound);
  }
  CHECK(one.global_certified == gc);
  CHECK(one.global_max <= one.global_certified);
  CHECK(one.complete);
}

TEST_CASE("halving the step never increases the bound") {
  ScanSpec s = small_spec();
  s.n_hi = 60;
  s.step = 8e-3;
  const ScanReport coarse = scan_range(s);
  s.step = 4e-3;
  const ScanReport fine = scan_range(s);
  for (std::size_t i = 0; i < coarse.per_n.size(); ++i) {
    CHECK(fine.per_n[i].certified_bound <= coarse.per_n[i].certified_bound);
    CHECK(fine.per_n[i].t_max >= coarse.per_n[i].t_max);
  }
}

TEST_CASE("bounds hold off the grid") {
  ScanSpec s = small_spec();
  const ScanReport r = scan_range(s);
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::int64_t> nd(s.n_lo, s.n_hi);
  std::uniform_real_distribution<double> pd(s.p_lo, s.p_hi);
  for (int c = 0; c < 100; ++c) {
    const std::int64_t n = nd(rng);
    const double tp = t_value(n, pd(rng));
    CHECK(tp <= r.per_n[static_cast<std::size_t>(n - 1)].certified_bound);
    CHECK(tp <= r.per_n[static_cast<std::size_t>(n - 1)].refined_bound);
  }
}

TEST_CASE("refinement lowers the bound") {
  ScanSpec s = small_spec();
  s.n_lo = 150;
  s.n_hi = 160;
  s.step = 1e-3;
  const ScanReport plain = scan_range(s);
  s.refine_target = 0.40965;
  const ScanReport refined = scan_range(s);
  for (std::size_t i = 0; i < plain.per_n.size(); ++i) {
    CHECK(refined.per_n[i].refined_bound <= plain.per_n[i].refined_bound);
    CHECK(refined.per_n[i].refined_bound < 0.40965);
    CHECK(refined.per_n[i].t_max == plain.per_n[i].t_max);
  }
}

TEST_CASE("kill and resume gives the same report") {
  const auto ckpt = temp_file("resume.ckpt");
  std::filesystem::remove(ckpt);
  ScanSpec s = small_spec();
  s.workers = 3;
  const ScanReport full = scan_range(s);

  for (const std::int64_t stop : {1, 16, 17, 150}) {
    ScanOptions first;
    first.checkpoint = ckpt;
    first.stop_after = stop;
    const ScanReport partial = scan_range(s, first);
    CHECK_FALSE(partial.complete);

    ScanOptions second;
    second.checkpoint = ckpt;
    second.resume = true;
    std::int64_t recomputed = 0;
    second.on_record = [&](const PerNResult&) { ++recomputed; };
    const ScanReport resumed = scan_range(s, second);
    CHECK(resumed.complete);
    CHECK(resumed.resumed_from.has_value());
    CHECK(recomputed < 300);
    CHECK(report_body_json(resumed) == report_body_json(full));
  }
  std::filesystem::remove(ckpt);
}

TEST_CASE("checkpoint corruption is detected") {
  const auto ckpt = temp_file("corrupt.ckpt");
  ScanSpec s = small_spec();
  s.n_hi = 40;
  ScanOptions o;
  o.checkpoint = ckpt;
  scan_range(s, o);

  std::string text = read_all(ckpt);
  const std::size_t pos = text.find('\n', text.find('\n') + 1) + 3;
  text[pos] = text[pos] == '1' ? '2' : '1';
  std::ofstream(ckpt, std::ios::trunc) << text;
  ScanOptions r;
  r.checkpoint = ckpt;
  r.resume = true;
  CHECK_THROWS_AS(scan_range(s, r), CheckpointError);

  // checkpoint from a different spec
  scan_range(s, o);
  ScanSpec other = s;
  other.step = 1e-2;
  CHECK_THROWS_AS(scan_range(other, r), CheckpointError);

  // truncated final line
  text = read_all(ckpt);
  std::ofstream(ckpt, std::ios::trunc) << text.substr(0, text.size() - 5);
  CHECK_THROWS_AS(scan_range(s, r), CheckpointError);
  std::filesystem::remove(ckpt);
}

TEST_CASE("checkpoint record round trip") {
  PerNResult r{12, 0.1689 + 3e-6, 0.40912345678901234, 0.4095, 0.40951, 17};
  const std::string line = encode_record(r);
  CHECK(decode_record(line) == r);
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK_THROWS_AS(decode_record(line.substr(0, line.size() - 1) + "0"), CheckpointError);
  CHECK_THROWS_AS(decode_record("garbage"), CheckpointError);
}

TEST_CASE("report serialization round trip") {
  ScanSpec s = small_spec();
  s.n_hi = 20;
  s.refine_target = 0.5;
  const ScanReport r = scan_range(s);
  const nlohmann::json j = report_to_json(r);
  CHECK(j.at("tool") == tool_version());
  const ScanReport back = report_from_json(nlohmann::json::parse(j.dump()));
  CHECK(report_body_json(back) == report_body_json(r));
  CHECK(back.spec.refine_target == 0.5);

  const std::string csv = report_to_csv(r);
  CHECK(csv.find("n,p_argmax,t_max,certified_bound,refined_bound,refine_evaluations\n") !=
        std::string::npos);
  CHECK(csv.find(format_double(r.per_n[4].t_max)) != std::string::npos);
  CHECK(report_to_human(r).find(format_double(r.global_certified)) != std::string::npos);
}

TEST_CASE("shortest round-trip numbers") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e-6) == "1e-06");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = d(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(parse_double(format_double(x)) == x);
  }
  CHECK_THROWS(parse_double("0.1x"));
  CHECK_THROWS(parse_double(""));
}

TEST_CASE("global certificate assembly") {
  ScanSpec s = small_spec();
  s.n_hi = 250;
  const ScanReport r = scan_range(s);

  const CertificateResult c = certify_global(r, SmallPVariant::KS2010, TailChoice::FullRemainder, 250);
  CHECK(c.verdict == std::max({c.finite.bound, c.small_p.bound, c.tail.bound}));
  CHECK(c.small_p.bound == small_p_T_bound(0.1689, SmallPVariant::KS2010));
  CHECK(c.tail.bound == tail_sup(TailChoice::FullRemainder, 0.1689, 250).value);
  CHECK_FALSE(c.finite.provenance.empty());
  CHECK(c.small_p.provenance.find("0.33477") != std::string::npos);
  CHECK(c.tail.provenance.find("K1 + K2 + K3") != std::string::npos);

  const CertificateResult b = certify_global(r, SmallPVariant::Shv2013b, TailChoice::FullRemainder, 250);
  CHECK(b.small_p.provenance.find("0.3328") != std::string::npos);

  CHECK_THROWS_AS(certify_global(r, SmallPVariant::KS2010, TailChoice::FullRemainder, 251),
                  CoverageGapError);
  CHECK_THROWS_AS(certify_global(r, SmallPVariant::KS2010, TailChoice::Neammanee, 250),
                  PreconditionError);  // sigma^2 < 100 at p_lo

  ScanSpec gap = small_spec();
  gap.n_lo = 2;
  gap.n_hi = 250;
  const ScanReport g = scan_range(gap);
  CHECK_THROWS_AS(certify_global(g, SmallPVariant::KS2010, TailChoice::FullRemainder, 250),
                  CoverageGapError);
}

TEST_CASE("tail choices") {
  CHECK(parse_tail_choice("simplified") == TailChoice::SimplifiedRemainder);
  CHECK(std::string(to_string(TailChoice::Neammanee)) == "neammanee");
  CHECK_THROWS_AS(parse_tail_choice("x"), SpecError);
  const Maximum e = tail_sup(TailChoice::FullRemainder, 0.1689, 500000);
  CHECK(e.value < 0.409954);
  CHECK(tail_sup(TailChoice::SimplifiedRemainder, 0.1689, 971000).value < 0.409954);
  CHECK_THROWS_AS(tail_sup(TailChoice::FullRemainder, 0.1689, 100), PreconditionError);
}
