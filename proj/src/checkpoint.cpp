#include "bercert/checkpoint.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "bercert/report_io.hpp"

namespace bercert {

namespace {

constexpr std::string_view kMagic = "bercert-checkpoint v1 spec=";

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    const std::size_t j = line.find(' ', i);
    const std::size_t end = j == std::string_view::npos ? line.size() : j;
    out.push_back(line.substr(i, end - i));
    i = end + 1;
  }
  return out;
}

std::int64_t parse_int(std::string_view s) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw CheckpointError("checkpoint: bad integer '" + std::string(s) + "'");
  }
  return v;
}

double parse_real(std::string_view s) {
  try {
    return parse_double(s);
  } catch (const std::exception&) {
    throw CheckpointError("checkpoint: bad number '" + std::string(s) + "'");
  }
}

}  // namespace

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string encode_record(const PerNResult& r) {
  std::string payload = std::to_string(r.n) + ' ' + format_double(r.p_argmax) + ' ' +
                        format_double(r.t_max) + ' ' + format_double(r.certified_bound) + ' ' +
                        format_double(r.refined_bound) + ' ' + std::to_string(r.refine_evaluations);
  return payload + ' ' + to_hex(fnv1a64(payload));
}

PerNResult decode_record(std::string_view line) {
  const std::size_t cut = line.rfind(' ');
  if (cut == std::string_view::npos) throw CheckpointError("checkpoint: truncated record");
  const std::string_view payload = line.substr(0, cut);
  if (to_hex(fnv1a64(payload)) != line.substr(cut + 1)) {
    throw CheckpointError("checkpoint: digest mismatch in record '" + std::string(line) + "'");
  }
  const auto f = split_spaces(payload);
  if (f.size() != 6) throw CheckpointError("checkpoint: record has wrong field count");
  PerNResult r;
  r.n = parse_int(f[0]);
  r.p_argmax = parse_real(f[1]);
  r.t_max = parse_real(f[2]);
  r.certified_bound = parse_real(f[3]);
  r.refined_bound = parse_real(f[4]);
  r.refine_evaluations = parse_int(f[5]);
  return r;
}

CheckpointContents read_checkpoint(const std::filesystem::path& path, const ScanSpec& spec) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind(kMagic, 0) != 0) {
    throw CheckpointError("checkpoint " + path.string() + ": missing or bad header");
  }
  CheckpointContents out;
  out.spec_digest = line.substr(kMagic.size());
  if (out.spec_digest != spec_digest(spec)) {
    throw CheckpointError("checkpoint " + path.string() + " was written for a different spec");
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    try {
      out.records.push_back(decode_record(line));
    } catch (const CheckpointError& e) {
      throw CheckpointError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  // A final line without newline means the writer was interrupted mid-record.
  in.clear();
  in.seekg(0, std::ios::end);
  if (in.tellg() > 0) {
    in.seekg(-1, std::ios::end);
    if (in.get() != '\n') throw CheckpointError(path.string() + ": truncated final record");
  }
  return out;
}

CheckpointWriter CheckpointWriter::create(const std::filesystem::path& path, const ScanSpec& spec) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw CheckpointError("cannot create checkpoint " + path.string());
  out << kMagic << spec_digest(spec) << '\n';
  out.flush();
  return CheckpointWriter(std::move(out));
}

CheckpointWriter CheckpointWriter::append_to(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw CheckpointError("cannot append to checkpoint " + path.string());
  return CheckpointWriter(std::move(out));
}

void CheckpointWriter::write(const std::vector<PerNResult>& records) {
  for (const PerNResult& r : records) out_ << encode_record(r) << '\n';
  out_.flush();
  if (!out_) throw CheckpointError("checkpoint write failed");
}

}  // namespace bercert
