#pragma once

// Serialization of scan reports, certificates and tables. Numbers are written
// as the shortest decimal that round-trips the binary64 value.

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "bercert/scan.hpp"
#include "bercert/tailbounds.hpp"

namespace bercert {

std::string tool_version();

std::string format_double(double x);
double parse_double(std::string_view text);

nlohmann::json to_json(const ScanSpec& spec);
ScanSpec scan_spec_from_json(const nlohmann::json& j);

/// Full report including timing and resume information.
nlohmann::json report_to_json(const ScanReport& report);

/// Deterministic part of a report: spec, per-n records and globals.
std::string report_body_json(const ScanReport& report);

ScanReport report_from_json(const nlohmann::json& j);

std::string report_to_csv(const ScanReport& report);
std::string report_to_human(const ScanReport& report);

nlohmann::json to_json(const CertificateResult& cert);
std::string certificate_to_human(const CertificateResult& cert);

nlohmann::json to_json(const TailBoundParams& params);

nlohmann::json table2_to_json(const std::vector<Table2Cell>& cells);
std::string table2_to_csv(const std::vector<Table2Cell>& cells);

}  // namespace bercert
