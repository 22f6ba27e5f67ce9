#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "bercert/report_io.hpp"
#include "bercert/scan.hpp"
#include "bercert/tailbounds.hpp"

namespace bercert::cli {

namespace {

using nlohmann::json;

const std::vector<std::string> kFormats = {"json", "csv", "human"};

struct Output {
  std::string format = "json";
  std::string path;
};

void add_output_options(CLI::App* cmd, Output& o) {
  cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember(kFormats));
  cmd->add_option("--out", o.path, "Write the artifact here instead of stdout");
}

// Writes the whole artifact at once; a failed run leaves no file behind.
void emit(const Output& o, const std::string& text, std::ostream& out) {
  if (o.path.empty()) {
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
    return;
  }
  const std::filesystem::path target(o.path);
  std::filesystem::path tmp = target;
  tmp += ".partial";
  {
    std::ofstream f(tmp, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << text;
    if (!text.empty() && text.back() != '\n') f << '\n';
    if (!f.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

std::string comment_lines(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream os;
  for (std::string line; std::getline(in, line);) os << "# " << line << '\n';
  return os.str();
}

struct ScanArgs {
  ScanSpec spec;
  std::optional<double> refine_target;
  std::string checkpoint;
  bool resume = false;
  std::int64_t stop_after = 0;
  Output out;
};

struct CertifyArgs {
  std::string report;
  std::string small_p = "ks2010";
  std::string tail = "full";
  std::optional<std::int64_t> n_tail;
  Output out;
};

struct TableArgs {
  std::vector<std::string> cells;
  double p_hi = 0.5;
  Output out;
};

struct CompareArgs {
  std::vector<double> d = {kSimplifiedRemainderConstant, kNeammaneeConstant};
  std::vector<std::int64_t> n = {970000, 971000, 4200000, 4600000};
  double p_lo = kCentralIntervalLo;
  double target = 0.409954;
  bool crossing = false;
  Output out;
};

std::string run_scan(const ScanArgs& a, const std::string& invocation, std::ostream& err) {
  ScanSpec spec = a.spec;
  spec.refine_target = a.refine_target;
  validate(spec);
  if (is_long_running(spec)) {
    err << "warning: this configuration is long-running (step " << format_double(spec.step)
        << ", n up to " << spec.n_hi << ")\n";
  }
  ScanOptions opts;
  if (!a.checkpoint.empty()) opts.checkpoint = a.checkpoint;
  opts.resume = a.resume;
  opts.stop_after = a.stop_after;
  const ScanReport report = scan_range(spec, opts);
  if (a.out.format == "csv") return comment_lines(invocation) + report_to_csv(report);
  if (a.out.format == "human") return report_to_human(report);
  json j = report_to_json(report);
  j["invocation"] = invocation;
  return j.dump(2);
}

std::string run_certify(const CertifyArgs& a, const std::string& invocation) {
  std::ifstream in(a.report);
  if (!in) throw std::runtime_error("cannot read report " + a.report);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SpecError("report " + a.report + " is not valid JSON: " + e.what());
  }
  const ScanReport report = report_from_json(j);
  const std::int64_t n_tail = a.n_tail.value_or(report.spec.n_hi);
  const CertificateResult cert = certify_global(report, parse_small_p_variant(a.small_p),
                                                parse_tail_choice(a.tail), n_tail);
  if (a.out.format == "human") return certificate_to_human(cert);
  json c = to_json(cert);
  c["tool"] = tool_version();
  c["config"] = {{"report", a.report},
                 {"small_p", a.small_p},
                 {"tail", a.tail},
                 {"n_tail", n_tail},
                 {"scan", to_json(report.spec)}};
  c["invocation"] = invocation;
  if (a.out.format == "csv") {
    std::ostringstream os;
    os << comment_lines(invocation) << "regime,bound,argmax,domain,provenance\n";
    for (const RegimePart* p : {&cert.finite, &cert.small_p, &cert.tail}) {
      os << p->regime << ',' << format_double(p->bound) << ',' << format_double(p->argmax) << ",\""
         << p->domain << "\",\"" << p->provenance << "\"\n";
    }
    os << "verdict," << format_double(cert.verdict) << ",," << cert.verdict_regime << ",\n";
    return os.str();
  }
  return c.dump(2);
}

std::vector<Table2Cell> table_cells(const TableArgs& a) {
  if (a.cells.empty()) return default_table2();
  std::vector<Table2Cell> cells;
  for (const std::string& spec : a.cells) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) {
      throw SpecError("--cell expects P_LO:N, got '" + spec + "'");
    }
    double p_lo = 0.0;
    std::int64_t n = 0;
    try {
      p_lo = parse_double(spec.substr(0, colon));
      n = std::stoll(spec.substr(colon + 1));
    } catch (const std::exception&) {
      throw SpecError("--cell expects P_LO:N, got '" + spec + "'");
    }
    cells.push_back(table2_cell(p_lo, n, a.p_hi));
  }
  return cells;
}

std::string run_table(const TableArgs& a, const std::string& invocation) {
  const std::vector<Table2Cell> cells = table_cells(a);
  if (a.out.format == "csv") return comment_lines(invocation) + table2_to_csv(cells);
  if (a.out.format == "human") {
    std::ostringstream os;
    os << "interval          N        D2           D2_bar\n";
    for (const Table2Cell& c : cells) {
      os << '[' << format_double(c.p_lo) << ", " << format_double(c.p_hi) << "]  " << c.N << "  "
         << format_double(c.d2.value) << "  " << format_double(c.d2bar.value) << '\n';
    }
    return os.str();
  }
  json j{{"tool", tool_version()},
         {"invocation", invocation},
         {"params", to_json(tail_params())},
         {"cells", table2_to_json(cells)}};
  return j.dump(2);
}

Maximum sup_d(double d, double p_lo, std::int64_t n) {
  return maximize_on_interval([&](double p) { return normal_plus_d_bound(p, n, d); }, p_lo, 0.5);
}

// Smallest n with sup_p bound(n) < target; the bound decreases in n.
std::optional<std::int64_t> crossing_n(double d, double p_lo, double target) {
  std::int64_t lo = 1;
  if (sup_d(d, p_lo, lo).value < target) return lo;
  std::int64_t hi = 2;
  while (sup_d(d, p_lo, hi).value >= target) {
    lo = hi;
    if (hi > (std::int64_t{1} << 52)) return std::nullopt;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    (sup_d(d, p_lo, mid).value < target ? hi : lo) = mid;
  }
  return hi;
}

std::string run_compare(const CompareArgs& a, const std::string& invocation) {
  if (!(a.p_lo > 0.0 && a.p_lo < 0.5)) {
    throw SpecError("--p-lo must lie in (0, 0.5), got " + format_double(a.p_lo));
  }
  json rows = json::array();
  std::ostringstream csv;
  std::ostringstream human;
  csv << comment_lines(invocation) << "d,n,sup,argmax,below_target\n";
  for (const double d : a.d) {
    for (const std::int64_t n : a.n) {
      const Maximum m = sup_d(d, a.p_lo, n);
      const bool below = m.value < a.target;
      rows.push_back({{"d", d}, {"n", n}, {"sup", m.value}, {"argmax", m.argmax},
                      {"below_target", below}});
      csv << format_double(d) << ',' << n << ',' << format_double(m.value) << ','
          << format_double(m.argmax) << ',' << (below ? "true" : "false") << '\n';
      human << "d=" << format_double(d) << "  n=" << n << "  sup=" << format_double(m.value)
            << "  at p=" << format_double(m.argmax) << (below ? "  below" : "  above")
            << " target\n";
    }
  }
  json crossings = json::array();
  if (a.crossing) {
    for (const double d : a.d) {
      const auto n = crossing_n(d, a.p_lo, a.target);
      crossings.push_back({{"d", d}, {"n", n ? json(*n) : json(nullptr)}});
      human << "d=" << format_double(d) << "  first n with sup below "
            << format_double(a.target) << ": " << (n ? std::to_string(*n) : "none") << '\n';
      csv << "# crossing d=" << format_double(d) << " n=" << (n ? std::to_string(*n) : "none")
          << '\n';
    }
  }
  if (a.out.format == "csv") return csv.str();
  if (a.out.format == "human") return human.str();
  json j{{"tool", tool_version()},
         {"invocation", invocation},
         {"config", {{"d", a.d}, {"n", a.n}, {"p_lo", a.p_lo}, {"target", a.target}}},
         {"rows", rows}};
  if (a.crossing) j["crossings"] = crossings;
  return j.dump(2);
}

// The active subcommand's options as a config file that reproduces the run.
std::string resolved_config(CLI::App* cmd) {
  std::istringstream in(cmd->config_to_str(true, false));
  std::ostringstream os;
  os << '[' << cmd->get_name() << "]\n";
  for (std::string line; std::getline(in, line);) {
    if (line.size() >= 3 && line.compare(line.size() - 3, 3, "=\"\"") == 0) continue;
    if (line.rfind("format=", 0) == 0 || line.rfind("out=", 0) == 0) continue;
    os << line << '\n';
  }
  return os.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certified bounds on the normalized Kolmogorov distance between Bin(n,p) and "
               "its normal approximation",
               "bercert"};
  app.set_version_flag("--version", tool_version());
  app.set_config("--config", "", "Read options from a key=value file ([scan], [certify], ... sections)");
  app.allow_config_extras(false);
  app.require_subcommand(1);

  ScanArgs scan;
  CLI::App* scan_cmd = app.add_subcommand("scan", "Grid scan of T_n(p) with per-n certified bounds");
  scan_cmd->fallthrough();
  scan_cmd->add_option("--n-lo", scan.spec.n_lo, "Smallest n")->capture_default_str();
  scan_cmd->add_option("--n-hi", scan.spec.n_hi, "Largest n")->capture_default_str();
  scan_cmd->add_option("--p-lo", scan.spec.p_lo, "Left end of the p interval")->capture_default_str();
  scan_cmd->add_option("--p-hi", scan.spec.p_hi, "Right end of the p interval")->capture_default_str();
  scan_cmd->add_option("--step", scan.spec.step, "Grid step h")->capture_default_str();
  scan_cmd->add_option("--workers", scan.spec.workers, "Worker threads")->capture_default_str();
  scan_cmd->add_option("--checkpoint", scan.checkpoint, "Checkpoint file");
  scan_cmd->add_option("--checkpoint-every", scan.spec.checkpoint_every,
                       "Completed n values between checkpoint flushes")
      ->capture_default_str();
  scan_cmd->add_flag("--resume", scan.resume, "Continue from an existing checkpoint");
  scan_cmd->add_option("--refine-target", scan.refine_target,
                       "Bisect grid cells whose Lipschitz bound is not below this value");
  scan_cmd->add_option("--max-refine-depth", scan.spec.max_refine_depth, "Bisection depth limit")
      ->capture_default_str();
  scan_cmd->add_option("--stop-after", scan.stop_after,
                       "Stop after this many new n values (leaves a resumable checkpoint)");
  add_output_options(scan_cmd, scan.out);

  CertifyArgs cert;
  CLI::App* cert_cmd = app.add_subcommand("certify", "Combine a scan report with small-p and large-n bounds");
  cert_cmd->fallthrough();
  cert_cmd->add_option("report", cert.report, "Scan report (JSON)")->required()->check(CLI::ExistingFile);
  cert_cmd->add_option("--small-p", cert.small_p, "Bound used on (0, p_lo]")
      ->check(CLI::IsMember({"ks2010", "shv2013a", "shv2013b"}))
      ->capture_default_str();
  cert_cmd->add_option("--tail", cert.tail, "Large-n majorant")
      ->check(CLI::IsMember({"full", "simplified", "neammanee"}))
      ->capture_default_str();
  cert_cmd->add_option("--n-tail", cert.n_tail, "Switch to the large-n majorant at this n (default: report n_hi)");
  add_output_options(cert_cmd, cert.out);

  TableArgs table;
  CLI::App* table_cmd = app.add_subcommand("table", "Maxima of the 1/sigma^2 remainder coefficients");
  table_cmd->fallthrough();
  table_cmd->add_option("--cell", table.cells, "P_LO:N, repeatable (default: the three standard columns)");
  table_cmd->add_option("--p-hi", table.p_hi, "Right end of every interval")->capture_default_str();
  add_output_options(table_cmd, table.out);

  CompareArgs cmp;
  CLI::App* cmp_cmd = app.add_subcommand("compare", "Sup over p of E(p) + d/(sigma (p^2+q^2)) at probe n");
  cmp_cmd->fallthrough();
  cmp_cmd->add_option("--d", cmp.d, "Constants d")->capture_default_str();
  cmp_cmd->add_option("--n", cmp.n, "Probe values of n")->capture_default_str();
  cmp_cmd->add_option("--p-lo", cmp.p_lo, "Left end of the p interval")->capture_default_str();
  cmp_cmd->add_option("--target", cmp.target, "Bound whose crossing is located")->capture_default_str();
  cmp_cmd->add_flag("--crossing", cmp.crossing, "Also find the first n with sup below target");
  add_output_options(cmp_cmd, cmp.out);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << tool_version() << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  CLI::App* active = app.get_subcommands().front();
  const std::string invocation = resolved_config(active);
  try {
    if (scan_cmd->parsed()) {
      emit(scan.out, run_scan(scan, invocation, err), out);
    } else if (cert_cmd->parsed()) {
      emit(cert.out, run_certify(cert, invocation), out);
    } else if (table_cmd->parsed()) {
      emit(table.out, run_table(table, invocation), out);
    } else if (cmp_cmd->parsed()) {
      emit(cmp.out, run_compare(cmp, invocation), out);
    }
  } catch (const SpecError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const CoverageGapError& e) {
    err << "coverage gap: " << e.what() << '\n';
    return kCoverageGap;
  } catch (const CheckpointError& e) {
    err << "checkpoint error: " << e.what() << '\n';
    return kCheckpointCorrupt;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return kDomain;
  } catch (const PreconditionError& e) {
    err << "precondition violated: " << e.what() << '\n';
    return kDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}

}  // namespace bercert::cli
