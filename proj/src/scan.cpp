#include "bercert/scan.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "bercert/certify.hpp"
#include "bercert/checkpoint.hpp"
#include "bercert/discrepancy.hpp"
#include "bercert/report_io.hpp"

namespace bercert {

namespace {

[[noreturn]] void spec_fail(const std::string& what) {
  throw SpecError("invalid scan spec: " + what);
}

std::string fmt(double x) {
  return format_double(x);
}

}  // namespace

void validate(const ScanSpec& s) {
  if (s.n_lo < 1) spec_fail("n_lo must be >= 1, got " + std::to_string(s.n_lo));
  if (s.n_hi < s.n_lo) {
    spec_fail("n_hi must be >= n_lo (" + std::to_string(s.n_lo) + "), got " +
              std::to_string(s.n_hi));
  }
  if (!(s.p_lo > 0.0 && s.p_lo <= 0.5)) spec_fail("p_lo must lie in (0, 0.5], got " + fmt(s.p_lo));
  if (!(s.p_hi >= s.p_lo && s.p_hi <= 0.5)) {
    spec_fail("p_hi must lie in [p_lo, 0.5], got " + fmt(s.p_hi));
  }
  if (!(s.step > 0.0) || !std::isfinite(s.step)) {
    spec_fail("step must be a positive finite number, got " + fmt(s.step));
  }
  if (s.p_hi > s.p_lo && (s.p_hi - s.p_lo) / s.step > 9e15) {
    spec_fail("step " + fmt(s.step) + " gives too many grid nodes");
  }
  if (s.workers < 1 || s.workers > 1024) {
    spec_fail("workers must lie in [1, 1024], got " + std::to_string(s.workers));
  }
  if (s.checkpoint_every < 1) {
    spec_fail("checkpoint_every must be >= 1, got " + std::to_string(s.checkpoint_every));
  }
  if (s.refine_target && !std::isfinite(*s.refine_target)) spec_fail("refine_target must be finite");
  if (s.max_refine_depth < 0 || s.max_refine_depth > 60) {
    spec_fail("max_refine_depth must lie in [0, 60], got " + std::to_string(s.max_refine_depth));
  }
}

bool is_long_running(const ScanSpec& spec) {
  const double cells = spec.p_hi > spec.p_lo ? (spec.p_hi - spec.p_lo) / spec.step : 1.0;
  const double n_count = static_cast<double>(spec.n_hi - spec.n_lo + 1);
  return spec.step < 1e-9 || spec.n_hi > 100000 || cells * n_count > 1e11;
}

std::int64_t grid_cells(const ScanSpec& spec) {
  if (!(spec.p_hi > spec.p_lo)) return 0;
  auto m = static_cast<std::int64_t>(std::ceil((spec.p_hi - spec.p_lo) / spec.step));
  m = std::max<std::int64_t>(m, 1);
  while (m > 1 && spec.p_lo + static_cast<double>(m - 1) * spec.step >= spec.p_hi) --m;
  while (spec.p_lo + static_cast<double>(m) * spec.step < spec.p_hi) ++m;
  return m;
}

double grid_node(const ScanSpec& spec, std::int64_t j) {
  const std::int64_t m = grid_cells(spec);
  if (j < 0 || j > m) throw DomainError("grid_node: index out of range");
  if (j == m) return spec.p_hi;
  return spec.p_lo + static_cast<double>(j) * spec.step;
}

std::string spec_digest(const ScanSpec& s) {
  std::ostringstream os;
  os << "n=" << s.n_lo << ".." << s.n_hi << ";p=" << fmt(s.p_lo) << ".." << fmt(s.p_hi)
     << ";h=" << fmt(s.step) << ";full<=" << kFullRangeMaxN
     << ";refine=" << (s.refine_target ? fmt(*s.refine_target) : std::string("none"))
     << ";depth=" << s.max_refine_depth;
  return to_hex(fnv1a64(os.str()));
}

PerNResult scan_single_n(const ScanSpec& spec, std::int64_t n) {
  DiscrepancyEvaluator ev;
  const EvalMode mode = default_mode(n);
  auto t_of = [&](double p) { return ev.evaluate(BinomialPoint(n, p), mode).t_value; };

  PerNResult r;
  r.n = n;
  const std::int64_t m = grid_cells(spec);
  if (m == 0) {
    // Single node: the interval is a point and the grid maximum is exact.
    r.p_argmax = spec.p_lo;
    r.t_max = t_of(spec.p_lo);
    r.certified_bound = r.t_max;
    r.refined_bound = r.t_max;
    return r;
  }

  double a = grid_node(spec, 0);
  double ta = t_of(a);
  r.p_argmax = a;
  r.t_max = ta;
  double cells_max = -std::numeric_limits<double>::infinity();
  for (std::int64_t j = 1; j <= m; ++j) {
    const double b = grid_node(spec, j);
    const double tb = t_of(b);
    if (tb > r.t_max) {
      r.t_max = tb;
      r.p_argmax = b;
    }
    double bound;
    if (spec.refine_target) {
      const CellRefinement cell =
          refine_cell(n, a, b, ta, tb, t_of, *spec.refine_target, spec.max_refine_depth);
      bound = cell.bound;
      r.refine_evaluations += cell.evaluations;
    } else {
      bound = cell_bound(n, a, b, ta, tb);
    }
    cells_max = std::max(cells_max, bound);
    a = b;
    ta = tb;
  }
  r.certified_bound = certify_interval(n, r.t_max, spec.p_lo, spec.step, spec.p_hi).certified_bound;
  r.refined_bound = std::min(r.certified_bound, cells_max);
  return r;
}

void finalize_report(ScanReport& report) {
  const ScanSpec& s = report.spec;
  report.global_max = 0.0;
  report.global_certified = 0.0;
  report.global_refined = 0.0;
  for (const PerNResult& r : report.per_n) {
    report.global_max = std::max(report.global_max, r.t_max);
    report.global_certified = std::max(report.global_certified, r.certified_bound);
    report.global_refined = std::max(report.global_refined, r.refined_bound);
  }
  bool complete = static_cast<std::int64_t>(report.per_n.size()) == s.n_hi - s.n_lo + 1;
  for (std::size_t i = 0; complete && i < report.per_n.size(); ++i) {
    complete = report.per_n[i].n == s.n_lo + static_cast<std::int64_t>(i);
  }
  report.complete = complete;
}

ScanReport scan_range(const ScanSpec& spec, const ScanOptions& options) {
  validate(spec);
  const auto start = std::chrono::steady_clock::now();

  ScanReport report;
  report.spec = spec;
  std::map<std::int64_t, PerNResult> done;
  std::optional<CheckpointWriter> writer;

  if (options.checkpoint) {
    const auto& path = *options.checkpoint;
    if (options.resume && std::filesystem::exists(path)) {
      CheckpointContents contents = read_checkpoint(path, spec);
      for (const PerNResult& r : contents.records) {
        if (r.n < spec.n_lo || r.n > spec.n_hi || !done.emplace(r.n, r).second) {
          throw CheckpointError("checkpoint " + path.string() + ": unexpected record for n = " +
                                std::to_string(r.n));
        }
      }
      report.resumed_from = contents.spec_digest + "@" + std::to_string(done.size());
      writer.emplace(CheckpointWriter::append_to(path));
    } else {
      writer.emplace(CheckpointWriter::create(path, spec));
    }
  }

  std::vector<std::int64_t> pending;
  for (std::int64_t n = spec.n_lo; n <= spec.n_hi; ++n) {
    if (!done.count(n)) pending.push_back(n);
  }

  std::mutex mu;
  std::condition_variable cv;
  std::deque<PerNResult> ready;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;
  int running = static_cast<int>(std::min<std::size_t>(spec.workers, pending.size()));

  std::vector<std::thread> pool;
  for (int w = 0, count = running; w < count; ++w) {
    pool.emplace_back([&] {
      try {
        for (;;) {
          if (stop.load()) break;
          const std::size_t idx = next.fetch_add(1);
          if (idx >= pending.size()) break;
          PerNResult r = scan_single_n(spec, pending[idx]);
          std::lock_guard<std::mutex> lock(mu);
          ready.push_back(r);
          cv.notify_one();
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        stop = true;
      }
      std::lock_guard<std::mutex> lock(mu);
      --running;
      cv.notify_one();
    });
  }

  // Collector: owns `done` and the checkpoint file.
  std::vector<PerNResult> unflushed;
  std::int64_t fresh = 0;
  auto flush = [&] {
    if (writer && !unflushed.empty()) writer->write(unflushed);
    unflushed.clear();
  };
  try {
    std::unique_lock<std::mutex> lock(mu);
    for (;;) {
      cv.wait(lock, [&] { return !ready.empty() || running == 0; });
      if (ready.empty() && running == 0) break;
      std::deque<PerNResult> batch;
      batch.swap(ready);
      lock.unlock();
      for (const PerNResult& r : batch) {
        done.emplace(r.n, r);
        unflushed.push_back(r);
        if (options.on_record) options.on_record(r);
        ++fresh;
        if (static_cast<std::int64_t>(unflushed.size()) >= spec.checkpoint_every) flush();
        if (options.stop_after > 0 && fresh >= options.stop_after) stop = true;
      }
      lock.lock();
    }
  } catch (...) {
    stop = true;
    for (auto& t : pool) t.join();
    throw;
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  flush();

  report.per_n.reserve(done.size());
  for (auto& [n, r] : done) report.per_n.push_back(r);
  finalize_report(report);
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

const char* to_string(TailChoice choice) {
  switch (choice) {
    case TailChoice::FullRemainder: return "full";
    case TailChoice::SimplifiedRemainder: return "simplified";
    case TailChoice::Neammanee: return "neammanee";
  }
  return "?";
}

TailChoice parse_tail_choice(const std::string& name) {
  if (name == "full") return TailChoice::FullRemainder;
  if (name == "simplified") return TailChoice::SimplifiedRemainder;
  if (name == "neammanee") return TailChoice::Neammanee;
  throw SpecError("unknown tail choice '" + name + "' (expected full, simplified or neammanee)");
}

Maximum tail_sup(TailChoice choice, double p_lo, std::int64_t n) {
  switch (choice) {
    case TailChoice::FullRemainder:
      require_remainder_domain(p_lo, n);
      return maximize_on_interval([n](double p) { return E_bound(p, n); }, p_lo, 0.5);
    case TailChoice::SimplifiedRemainder:
      simplified_remainder_bound(p_lo, n);
      return maximize_on_interval([n](double p) { return simplified_remainder_bound(p, n); }, p_lo, 0.5);
    case TailChoice::Neammanee:
      neammanee_T_bound(p_lo, n);
      return maximize_on_interval([n](double p) { return neammanee_T_bound(p, n); }, p_lo, 0.5);
  }
  throw SpecError("unknown tail choice");
}

namespace {

std::string small_p_provenance(SmallPVariant v) {
  const auto [coeff, add] = small_p_coefficients(v);
  std::string source;
  switch (v) {
    case SmallPVariant::KS2010: source = "Korolev-Shevtsova (2010) structural-improvement bound"; break;
    case SmallPVariant::Shv2013a: source = "Shevtsova (2013) bound, first variant"; break;
    case SmallPVariant::Shv2013b: source = "Shevtsova (2013) bound, second variant"; break;
  }
  return "T_n(p) <= " + fmt(coeff) + "(1 + " + fmt(add) + "/rho(p)) for every n (" + source +
         "); increasing in p, so the value at p_lo bounds (0, p_lo]";
}

std::string tail_provenance(TailChoice c, std::int64_t n_tail) {
  const std::string at = " at n = " + std::to_string(n_tail);
  switch (c) {
    case TailChoice::FullRemainder:
      return "E(p,n) = E(p) + sqrt(n) R(p,n)/rho(p) with R = K1 + K2 + K3, the explicit remainder of "
             "the asymptotic expansion; valid for n >= 200, 4/n <= p <= 0.5 and nonincreasing in n; "
             "sup over p" + at;
    case TailChoice::SimplifiedRemainder: {
      std::string s = "E(p) + 0.05532/(sigma (p^2+q^2)), the simplified remainder on [0.1689, 0.5]; "
                      "sup over p" + at;
      if (n_tail < 500000) s += " (the constant 0.05532 was derived for n >= 500000)";
      return s;
    }
    case TailChoice::Neammanee:
      return "E(p) + 0.1618/(sigma (p^2+q^2)) from Neammanee's refinement of Uspensky's local "
             "expansion; requires sigma^2 >= 100; sup over p" + at;
  }
  return "";
}

}  // namespace

CertificateResult certify_global(const ScanReport& report, SmallPVariant small_p_variant,
                                 TailChoice tail_choice, std::int64_t n_tail) {
  if (n_tail < 1) throw SpecError("n_tail must be >= 1, got " + std::to_string(n_tail));
  const ScanSpec& s = report.spec;
  if (s.p_hi != 0.5) {
    throw CoverageGapError("report p-range ends at " + fmt(s.p_hi) + ", not at 0.5");
  }
  const auto& per_n = report.per_n;
  std::int64_t expect = 1;
  double finite = 0.0;
  double finite_arg = 0.0;
  for (const PerNResult& r : per_n) {
    if (r.n > n_tail) break;
    if (r.n != expect) {
      throw CoverageGapError("report has no record for n = " + std::to_string(expect) +
                             " (needed up to n_tail = " + std::to_string(n_tail) + ")");
    }
    if (r.refined_bound > finite) {
      finite = r.refined_bound;
      finite_arg = r.p_argmax;
    }
    ++expect;
  }
  if (expect <= n_tail) {
    throw CoverageGapError("report stops at n = " + std::to_string(expect - 1) +
                           ", certificate needs every n up to " + std::to_string(n_tail));
  }

  CertificateResult out;
  out.n_finite = n_tail;
  out.n_tail = n_tail;
  out.p_lo = s.p_lo;
  out.small_p_variant = small_p_variant;
  out.tail_choice = tail_choice;

  out.finite.regime = "finite_scan";
  out.finite.domain = "1 <= n <= " + std::to_string(n_tail) + ", " + fmt(s.p_lo) + " <= p <= 0.5";
  out.finite.bound = finite;
  out.finite.argmax = finite_arg;
  out.finite.provenance = "grid maximum of T_n with step " + fmt(s.step) +
                          " plus Lipschitz slack sqrt(n) L(a) (b-a)/2 per cell, L(p) decreasing"
                          " on (0, 0.5]" +
                          (s.refine_target ? ", cells bisected toward " + fmt(*s.refine_target)
                                           : std::string());

  out.small_p.regime = "small_p";
  out.small_p.domain = "all n, 0 < p <= " + fmt(s.p_lo);
  out.small_p.bound = small_p_T_bound(s.p_lo, small_p_variant);
  out.small_p.argmax = s.p_lo;
  out.small_p.provenance = small_p_provenance(small_p_variant);

  const Maximum tail = tail_sup(tail_choice, s.p_lo, n_tail);
  out.tail.regime = "tail";
  out.tail.domain = "n >= " + std::to_string(n_tail) + ", " + fmt(s.p_lo) + " <= p <= 0.5";
  out.tail.bound = tail.value;
  out.tail.argmax = tail.argmax;
  out.tail.provenance = tail_provenance(tail_choice, n_tail);

  out.verdict = out.finite.bound;
  out.verdict_regime = out.finite.regime;
  for (const RegimePart* part : {&out.small_p, &out.tail}) {
    if (part->bound > out.verdict) {
      out.verdict = part->bound;
      out.verdict_regime = part->regime;
    }
  }
  return out;
}

}  // namespace bercert
