#pragma once

// Append-only checkpoint of completed per-n scan records.
//
// Line 1:   bercert-checkpoint v1 spec=<spec digest>
// Record:   n p_argmax t_max certified_bound refined_bound evaluations digest
//
// The digest is FNV-1a (64 bit, hex) of the record text before it.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "bercert/scan.hpp"

namespace bercert {

std::uint64_t fnv1a64(std::string_view data);
std::string to_hex(std::uint64_t value);

std::string encode_record(const PerNResult& record);
/// Throws CheckpointError on malformed text or digest mismatch.
PerNResult decode_record(std::string_view line);

struct CheckpointContents {
  std::string spec_digest;
  std::vector<PerNResult> records;
};

/// Reads and verifies every line; the header must match `spec`.
CheckpointContents read_checkpoint(const std::filesystem::path& path, const ScanSpec& spec);

class CheckpointWriter {
 public:
  /// Creates (truncating) the file and writes the header.
  static CheckpointWriter create(const std::filesystem::path& path, const ScanSpec& spec);
  /// Appends to an existing, already verified checkpoint.
  static CheckpointWriter append_to(const std::filesystem::path& path);

  void write(const std::vector<PerNResult>& records);

 private:
  explicit CheckpointWriter(std::ofstream out) : out_(std::move(out)) {}
  std::ofstream out_;
};

}  // namespace bercert
