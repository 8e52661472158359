#include "cdxstats/cdx.hpp"

#include <zlib.h>

#include <cstring>
#include <stdexcept>

#include "cdxstats/kernels.hpp"

namespace cdxstats {

namespace {

constexpr std::size_t kMaxFields = 11;

inline bool is_dash(std::string_view s) { return s.size() == 1 && s[0] == '-'; }

inline void assign(std::string& dst, std::string_view src) {
  dst.assign(src.data(), src.size());
}

}  // namespace

std::string_view skip_reason_name(SkipReason r) {
  switch (r) {
    case SkipReason::HeaderLine: return "HeaderLine";
    case SkipReason::FieldCount: return "FieldCount";
    case SkipReason::BadTimestamp: return "BadTimestamp";
    case SkipReason::BadStatus: return "BadStatus";
    case SkipReason::BadSize: return "BadSize";
  }
  return "?";
}

void ParseReport::add_skip(std::uint64_t line_number, SkipReason reason) {
  if (reason == SkipReason::HeaderLine) {
    ++header_lines;
  } else {
    ++lines_skipped;
    if (first_errors.size() < 100) first_errors.emplace_back(line_number, reason);
  }
}

void ParseReport::merge(const ParseReport& other) {
  lines_read += other.lines_read;
  records_ok += other.records_ok;
  lines_skipped += other.lines_skipped;
  header_lines += other.header_lines;
  for (const auto& e : other.first_errors) {
    if (first_errors.size() >= 100) break;
    first_errors.push_back(e);
  }
}

std::optional<SkipReason> parse_line(std::string_view line,
                                     CaptureRecord& out) {
  if (line.size() >= 4 && line[0] == ' ' &&
      std::memcmp(line.data() + 1, "CDX", 3) == 0) {
    return SkipReason::HeaderLine;
  }

  kernels::FieldSpan spans[kMaxFields];
  const auto& ops = kernels::active_ops();
  std::size_t n = ops.split_fields(line.data(), line.size(), spans, kMaxFields);
  if (n < kMaxFields) return SkipReason::FieldCount;

  auto field = [&](std::size_t i) {
    return std::string_view(line.data() + spans[i].off, spans[i].len);
  };

  std::string_view ts = field(1);
  auto instant = parse_timestamp14(ts);
  if (!instant) return SkipReason::BadTimestamp;

  std::string_view status = field(4);
  int status_code = -1;
  if (!is_dash(status)) {
    std::uint64_t v = 0;
    if (status.size() != 3 || !ops.parse_digits(status.data(), 3, v) ||
        v < 100 || v > 599) {
      return SkipReason::BadStatus;
    }
    status_code = static_cast<int>(v);
  }

  std::string_view size = field(8);
  std::int64_t size_bytes = -1;
  if (!is_dash(size)) {
    std::uint64_t v = 0;
    if (!ops.parse_digits(size.data(), size.size(), v) ||
        v > static_cast<std::uint64_t>(INT64_MAX)) {
      return SkipReason::BadSize;
    }
    size_bytes = static_cast<std::int64_t>(v);
  }

  if (spans[0].len == 0) return SkipReason::FieldCount;  // empty url key

  out.timestamp = *instant;
  out.status = status_code;
  out.size = size_bytes;
  assign(out.canonical_url, field(0));
  assign(out.original_url, field(2));
  assign(out.mime_type, field(3));
  assign(out.checksum, field(5));

  std::string_view redirect = field(6);
  if (is_dash(redirect)) out.redirect_url.clear();
  else assign(out.redirect_url, redirect);

  std::string_view meta = field(7);
  if (is_dash(meta)) out.meta_flags.clear();
  else assign(out.meta_flags, meta);

  std::string_view offset = field(9);
  std::uint64_t off = 0;
  ops.parse_digits(offset.data(), offset.size(), off);  // bad offset -> 0
  out.offset = off;
  assign(out.filename, field(10));
  return std::nullopt;
}

std::string CaptureRecord::format_line() const {
  std::string line;
  line.reserve(canonical_url.size() + original_url.size() + 96);
  line += canonical_url;
  line += ' ';
  line += format_timestamp14(timestamp);
  line += ' ';
  line += original_url;
  line += ' ';
  line += mime_type;
  line += ' ';
  if (status >= 0) line += std::to_string(status);
  else line += '-';
  line += ' ';
  line += checksum;
  line += ' ';
  line += redirect_url.empty() ? "-" : redirect_url;
  line += ' ';
  line += meta_flags.empty() ? "-" : meta_flags;
  line += ' ';
  if (size >= 0) line += std::to_string(size);
  else line += '-';
  line += ' ';
  line += std::to_string(offset);
  line += ' ';
  line += filename;
  return line;
}

StrictParseError::StrictParseError(std::string file, std::uint64_t line,
                                   SkipReason reason)
    : std::runtime_error(file + ":" + std::to_string(line) +
                         ": " + std::string(skip_reason_name(reason))),
      reason_(reason) {}

struct ManifestReader::Impl {
  gzFile gz = nullptr;
  std::string path;
  bool strict = false;
  ParseReport report;
  std::vector<char> buf;
  std::size_t begin = 0;   // start of unconsumed data
  std::size_t end = 0;     // end of valid data
  bool eof = false;

  static constexpr std::size_t kBufSize = 1u << 20;

  explicit Impl(const std::filesystem::path& p, bool strict_mode)
      : path(p.string()), strict(strict_mode) {
    gz = gzopen(path.c_str(), "rb");
    if (gz == nullptr) throw std::runtime_error("cannot open " + path);
    gzbuffer(gz, 256 * 1024);
    buf.resize(kBufSize);
  }

  ~Impl() {
    if (gz != nullptr) gzclose(gz);
  }

  bool fill() {
    if (eof) return end > begin;
    if (begin > 0) {
      std::memmove(buf.data(), buf.data() + begin, end - begin);
      end -= begin;
      begin = 0;
    }
    if (end == buf.size()) buf.resize(buf.size() * 2);  // oversized line
    int got = gzread(gz, buf.data() + end,
                     static_cast<unsigned>(buf.size() - end));
    if (got < 0) {
      int errnum = 0;
      const char* msg = gzerror(gz, &errnum);
      throw std::runtime_error("read error in " + path + ": " +
                               (msg != nullptr ? msg : ""));
    }
    if (got == 0) eof = true;
    end += static_cast<std::size_t>(got);
    return end > begin;
  }

  // Next physical line without the terminator; false at end of file.
  bool next_line(std::string_view& line) {
    while (true) {
      const char* nl = static_cast<const char*>(
          std::memchr(buf.data() + begin, '\n', end - begin));
      if (nl != nullptr) {
        std::size_t len = static_cast<std::size_t>(nl - (buf.data() + begin));
        line = std::string_view(buf.data() + begin, len);
        begin += len + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        return true;
      }
      if (eof) {
        if (end > begin) {
          line = std::string_view(buf.data() + begin, end - begin);
          begin = end;
          if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
          return true;
        }
        return false;
      }
      fill();
    }
  }
};

ManifestReader::ManifestReader(const std::filesystem::path& path, bool strict)
    : impl_(std::make_unique<Impl>(path, strict)) {}

ManifestReader::~ManifestReader() = default;
ManifestReader::ManifestReader(ManifestReader&&) noexcept = default;
ManifestReader& ManifestReader::operator=(ManifestReader&&) noexcept = default;

bool ManifestReader::next(CaptureRecord& out) {
  std::string_view line;
  while (impl_->next_line(line)) {
    impl_->report.lines_read += 1;
    auto skip = parse_line(line, out);
    if (!skip) {
      impl_->report.records_ok += 1;
      return true;
    }
    impl_->report.add_skip(impl_->report.lines_read, *skip);
    if (impl_->strict && *skip != SkipReason::HeaderLine) {
      throw StrictParseError(impl_->path, impl_->report.lines_read, *skip);
    }
  }
  return false;
}

const ParseReport& ManifestReader::report() const { return impl_->report; }

}  // namespace cdxstats
