#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cdxstats/calendar.hpp"

namespace cdxstats {

// One CDX line: a snapshot of one URL at one instant. Absent fields
// (`-` in the file) are encoded as -1 for status/size and as empty strings
// for redirect_url/meta_flags.
struct CaptureRecord {
  std::string canonical_url;  // SURT-style canonical key
  Instant timestamp = 0;
  std::string original_url;
  std::string mime_type;
  int status = -1;             // 100..599, or -1 when absent
  std::string checksum;
  std::string redirect_url;    // empty when absent
  std::string meta_flags;      // empty when absent
  std::int64_t size = -1;      // stored GZip-compressed bytes, -1 absent
  std::uint64_t offset = 0;
  std::string filename;

  bool has_status() const { return status >= 0; }
  bool is_success() const { return status >= 200 && status < 300; }
  std::int64_t size_or_zero() const { return size >= 0 ? size : 0; }

  // 11-field line, absent fields as `-`; re-parsing yields an equal record.
  std::string format_line() const;

  bool operator==(const CaptureRecord&) const = default;
};

enum class SkipReason {
  HeaderLine,
  FieldCount,
  BadTimestamp,
  BadStatus,
  BadSize,
};

std::string_view skip_reason_name(SkipReason r);

struct ParseReport {
  std::uint64_t lines_read = 0;
  std::uint64_t records_ok = 0;
  std::uint64_t lines_skipped = 0;  // excludes header lines
  std::uint64_t header_lines = 0;
  std::vector<std::pair<std::uint64_t, SkipReason>> first_errors;  // <= 100

  void add_skip(std::uint64_t line_number, SkipReason reason);
  void merge(const ParseReport& other);
};

// Parses one physical line. Returns nullopt and fills `out` on success,
// otherwise the skip reason. `out` is reused across calls to keep string
// capacity.
std::optional<SkipReason> parse_line(std::string_view line,
                                     CaptureRecord& out);

class StrictParseError : public std::runtime_error {
 public:
  StrictParseError(std::string file, std::uint64_t line, SkipReason reason);
  SkipReason reason() const { return reason_; }

 private:
  SkipReason reason_;
};

// Streams capture records out of a CDX manifest, plain or GZip-compressed
// (sniffed transparently). With `strict`, the first skip other than a header
// line throws StrictParseError. I/O and decompression failures throw
// std::runtime_error.
class ManifestReader {
 public:
  ManifestReader(const std::filesystem::path& path, bool strict = false);
  ~ManifestReader();
  ManifestReader(ManifestReader&&) noexcept;
  ManifestReader& operator=(ManifestReader&&) noexcept;

  // False at end of stream.
  bool next(CaptureRecord& out);

  const ParseReport& report() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cdxstats
