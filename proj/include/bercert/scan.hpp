#pragma once

// Parallel sweep over (n, p-grid) producing per-n certified suprema of T_n,
// and assembly of the global bound from the scan, the small-p bound and a
// large-n majorant.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bercert/tailbounds.hpp"

namespace bercert {

/// Invalid scan or certificate configuration (maps to a usage error).
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Checkpoint file unreadable, tampered with, or written for another spec.
class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A report does not cover the n-range a certificate needs.
class CoverageGapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScanSpec {
  std::int64_t n_lo = 1;
  std::int64_t n_hi = 5000;
  double p_lo = kCentralIntervalLo;
  double p_hi = 0.5;
  double step = 1e-6;
  int workers = 1;
  std::int64_t checkpoint_every = 64;
  // When set, cells whose bound is not below this value are bisected.
  std::optional<double> refine_target;
  int max_refine_depth = 48;
};

/// Throws SpecError describing the first violated constraint.
void validate(const ScanSpec& spec);

/// True for the multi-day configurations (tiny step or very large n).
bool is_long_running(const ScanSpec& spec);

/// Number of grid cells M; nodes are p_lo + j*step for j < M and p_hi for j = M.
std::int64_t grid_cells(const ScanSpec& spec);
double grid_node(const ScanSpec& spec, std::int64_t j);

/// Digest of every field that influences results (not workers or checkpoint cadence).
std::string spec_digest(const ScanSpec& spec);

struct PerNResult {
  std::int64_t n = 0;
  double p_argmax = 0.0;        // grid node attaining t_max (smallest on ties)
  double t_max = 0.0;           // max of T_n over grid nodes
  double certified_bound = 0.0; // t_max + sqrt(n) (h/2) L(p_lo)
  double refined_bound = 0.0;   // min(certified_bound, cell-wise bound)
  std::int64_t refine_evaluations = 0;

  bool operator==(const PerNResult&) const = default;
};

/// Computes the record for one n. Pure; used by every worker.
PerNResult scan_single_n(const ScanSpec& spec, std::int64_t n);

struct ScanReport {
  ScanSpec spec;
  std::vector<PerNResult> per_n;  // ascending n
  double global_max = 0.0;
  double global_certified = 0.0;
  double global_refined = 0.0;
  bool complete = false;
  double elapsed_seconds = 0.0;
  std::optional<std::string> resumed_from;
};

struct ScanOptions {
  std::optional<std::filesystem::path> checkpoint;
  bool resume = false;
  // Stop handing out work after this many new records (0 = run to the end).
  // Used to emulate an interrupted run.
  std::int64_t stop_after = 0;
  std::function<void(const PerNResult&)> on_record;
};

ScanReport scan_range(const ScanSpec& spec, const ScanOptions& options = {});

/// Recomputes the global fields and completeness from per_n.
void finalize_report(ScanReport& report);

enum class TailChoice { FullRemainder, SimplifiedRemainder, Neammanee };

const char* to_string(TailChoice choice);
TailChoice parse_tail_choice(const std::string& name);

struct RegimePart {
  std::string regime;      // finite_scan, small_p, tail
  std::string domain;      // human-readable (n, p) region covered
  double bound = 0.0;
  double argmax = 0.0;     // p attaining the bound where meaningful
  std::string provenance;  // which result produced the bound
};

struct CertificateResult {
  std::int64_t n_finite = 0;
  std::int64_t n_tail = 0;
  double p_lo = 0.0;
  SmallPVariant small_p_variant = SmallPVariant::KS2010;
  TailChoice tail_choice = TailChoice::FullRemainder;
  RegimePart finite;
  RegimePart small_p;
  RegimePart tail;
  double verdict = 0.0;
  std::string verdict_regime;
};

/// Sup over p in [p_lo, 0.5] of the chosen large-n majorant at n.
Maximum tail_sup(TailChoice choice, double p_lo, std::int64_t n);

/// Combines a scan report reaching n_tail with the small-p and tail bounds.
CertificateResult certify_global(const ScanReport& report, SmallPVariant small_p_variant,
                                 TailChoice tail_choice, std::int64_t n_tail);

}  // namespace bercert
