#include "bercert/report_io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "bercert/discrepancy.hpp"

namespace bercert {

using nlohmann::json;

std::string tool_version() {
  return std::string("bercert ") + BERCERT_VERSION;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return v;
}

json to_json(const ScanSpec& s) {
  return json{{"n_lo", s.n_lo},
              {"n_hi", s.n_hi},
              {"p_lo", s.p_lo},
              {"p_hi", s.p_hi},
              {"step", s.step},
              {"workers", s.workers},
              {"checkpoint_every", s.checkpoint_every},
              {"refine_target", s.refine_target ? json(*s.refine_target) : json(nullptr)},
              {"max_refine_depth", s.max_refine_depth},
              {"mode_policy", "full_range for n <= " + std::to_string(kFullRangeMaxN) +
                                  ", restricted_window above"}};
}

ScanSpec scan_spec_from_json(const json& j) {
  ScanSpec s;
  try {
    s.n_lo = j.at("n_lo").get<std::int64_t>();
    s.n_hi = j.at("n_hi").get<std::int64_t>();
    s.p_lo = j.at("p_lo").get<double>();
    s.p_hi = j.at("p_hi").get<double>();
    s.step = j.at("step").get<double>();
    s.workers = j.value("workers", 1);
    s.checkpoint_every = j.value("checkpoint_every", std::int64_t{64});
    if (j.contains("refine_target") && !j["refine_target"].is_null()) {
      s.refine_target = j["refine_target"].get<double>();
    }
    s.max_refine_depth = j.value("max_refine_depth", 48);
  } catch (const json::exception& e) {
    throw SpecError(std::string("bad scan config: ") + e.what());
  }
  validate(s);
  return s;
}

namespace {

json per_n_json(const PerNResult& r) {
  return json{{"n", r.n},
              {"p_argmax", r.p_argmax},
              {"t_max", r.t_max},
              {"certified_bound", r.certified_bound},
              {"refined_bound", r.refined_bound},
              {"refine_evaluations", r.refine_evaluations}};
}

json body_json(const ScanReport& r) {
  json per_n = json::array();
  for (const PerNResult& x : r.per_n) per_n.push_back(per_n_json(x));
  json spec = to_json(r.spec);
  // Worker count and checkpoint cadence never change the numbers.
  spec.erase("workers");
  spec.erase("checkpoint_every");
  return json{{"spec", spec},
              {"global_max", r.global_max},
              {"global_certified", r.global_certified},
              {"global_refined", r.global_refined},
              {"complete", r.complete},
              {"per_n", per_n}};
}

}  // namespace

json report_to_json(const ScanReport& r) {
  json j = body_json(r);
  j["tool"] = tool_version();
  j["config"] = to_json(r.spec);
  j["elapsed_seconds"] = r.elapsed_seconds;
  j["resumed_from"] = r.resumed_from ? json(*r.resumed_from) : json(nullptr);
  return j;
}

std::string report_body_json(const ScanReport& r) {
  return body_json(r).dump();
}

ScanReport report_from_json(const json& j) {
  ScanReport r;
  try {
    r.spec = scan_spec_from_json(j.contains("config") ? j.at("config") : j.at("spec"));
    std::int64_t prev = 0;
    for (const json& x : j.at("per_n")) {
      PerNResult p;
      p.n = x.at("n").get<std::int64_t>();
      p.p_argmax = x.at("p_argmax").get<double>();
      p.t_max = x.at("t_max").get<double>();
      p.certified_bound = x.at("certified_bound").get<double>();
      p.refined_bound = x.value("refined_bound", p.certified_bound);
      p.refine_evaluations = x.value("refine_evaluations", std::int64_t{0});
      if (p.n <= prev) throw SpecError("report per_n is not strictly ascending at n = " + std::to_string(p.n));
      prev = p.n;
      r.per_n.push_back(p);
    }
    r.elapsed_seconds = j.value("elapsed_seconds", 0.0);
    if (j.contains("resumed_from") && j["resumed_from"].is_string()) {
      r.resumed_from = j["resumed_from"].get<std::string>();
    }
  } catch (const json::exception& e) {
    throw SpecError(std::string("malformed scan report: ") + e.what());
  }
  finalize_report(r);
  return r;
}

std::string report_to_csv(const ScanReport& r) {
  std::ostringstream os;
  os << "# " << tool_version() << '\n';
  os << "# config " << to_json(r.spec).dump() << '\n';
  os << "n,p_argmax,t_max,certified_bound,refined_bound,refine_evaluations\n";
  for (const PerNResult& x : r.per_n) {
    os << x.n << ',' << format_double(x.p_argmax) << ',' << format_double(x.t_max) << ','
       << format_double(x.certified_bound) << ',' << format_double(x.refined_bound) << ','
       << x.refine_evaluations << '\n';
  }
  return os.str();
}

std::string report_to_human(const ScanReport& r) {
  std::ostringstream os;
  os << tool_version() << '\n' << "config " << to_json(r.spec).dump() << "\n\n";
  os << "n  p_argmax  t_max  certified_bound  refined_bound  refine_evaluations\n";
  for (const PerNResult& x : r.per_n) {
    os << x.n << "  " << format_double(x.p_argmax) << "  " << format_double(x.t_max) << "  "
       << format_double(x.certified_bound) << "  " << format_double(x.refined_bound) << "  "
       << x.refine_evaluations << '\n';
  }
  os << "\nglobal_max        " << format_double(r.global_max) << '\n'
     << "global_certified  " << format_double(r.global_certified) << '\n'
     << "global_refined    " << format_double(r.global_refined) << '\n'
     << "complete          " << (r.complete ? "yes" : "no") << '\n'
     << "elapsed_seconds   " << format_double(r.elapsed_seconds) << '\n';
  if (r.resumed_from) os << "resumed_from      " << *r.resumed_from << '\n';
  return os.str();
}

namespace {

json part_json(const RegimePart& p) {
  return json{{"regime", p.regime},
              {"domain", p.domain},
              {"bound", p.bound},
              {"argmax", p.argmax},
              {"provenance", p.provenance}};
}

}  // namespace

json to_json(const CertificateResult& c) {
  return json{{"n_tail", c.n_tail},
              {"p_lo", c.p_lo},
              {"small_p_variant", to_string(c.small_p_variant)},
              {"tail_choice", to_string(c.tail_choice)},
              {"parts", json::array({part_json(c.finite), part_json(c.small_p), part_json(c.tail)})},
              {"verdict", c.verdict},
              {"verdict_regime", c.verdict_regime}};
}

std::string certificate_to_human(const CertificateResult& c) {
  std::ostringstream os;
  for (const RegimePart* p : {&c.finite, &c.small_p, &c.tail}) {
    os << p->regime << ": " << format_double(p->bound) << "  [" << p->domain << "]\n"
       << "  " << p->provenance << '\n';
  }
  os << "verdict: " << format_double(c.verdict) << " (" << c.verdict_regime << ")\n";
  return os.str();
}

json to_json(const TailBoundParams& params) {
  json j = json::object();
  for (const auto& [key, value] : audit_entries(params)) j[key] = value;
  return j;
}

json table2_to_json(const std::vector<Table2Cell>& cells) {
  json arr = json::array();
  for (const Table2Cell& c : cells) {
    arr.push_back(json{{"p_lo", c.p_lo},
                       {"p_hi", c.p_hi},
                       {"N", c.N},
                       {"D2", c.d2.value},
                       {"D2_argmax", c.d2.argmax},
                       {"D2_bar", c.d2bar.value},
                       {"D2_bar_argmax", c.d2bar.argmax}});
  }
  return arr;
}

std::string table2_to_csv(const std::vector<Table2Cell>& cells) {
  std::ostringstream os;
  os << "interval,N,D2_max,D2bar_max,D2_argmax,D2bar_argmax\n";
  for (const Table2Cell& c : cells) {
    os << "\"[" << format_double(c.p_lo) << ',' << format_double(c.p_hi) << "]\"," << c.N << ','
       << format_double(c.d2.value) << ',' << format_double(c.d2bar.value) << ','
       << format_double(c.d2.argmax) << ',' << format_double(c.d2bar.argmax) << '\n';
  }
  return os.str();
}

}  // namespace bercert
