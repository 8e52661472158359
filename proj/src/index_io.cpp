#include "cdxstats/index_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace cdxstats {

namespace {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void append_int(std::string& out, std::int64_t v) {
  char buf[24];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

std::uint32_t partition_of(std::string_view domain, int partitions) {
  return static_cast<std::uint32_t>(fnv1a64(domain) %
                                    static_cast<std::uint64_t>(partitions));
}

void IndexManifest::save(const std::filesystem::path& dir) const {
  nlohmann::json j;
  j["format"] = "cdxstats-index";
  j["version"] = version;
  j["partitions"] = partitions;
  auto files_json = nlohmann::json::array();
  for (const auto& f : files) {
    files_json.push_back({{"name", f.name},
                          {"crc32", f.crc32},
                          {"lines", f.lines},
                          {"bytes", f.bytes}});
  }
  j["files"] = files_json;
  std::ofstream out(dir / kIndexManifestName, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + dir.string());
  out << j.dump(2) << '\n';
}

IndexManifest IndexManifest::load(const std::filesystem::path& dir) {
  std::ifstream in(dir / kIndexManifestName, std::ios::binary);
  if (!in)
    throw std::runtime_error("no index manifest in " + dir.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IndexCorruptError("unreadable index manifest: " +
                            std::string(e.what()));
  }
  IndexManifest m;
  m.version = j.value("version", 0);
  if (m.version != kIndexVersion)
    throw IndexCorruptError("unsupported index version " +
                            std::to_string(m.version));
  m.partitions = j.at("partitions").get<int>();
  for (const auto& f : j.at("files")) {
    PartitionInfo info;
    info.name = f.at("name").get<std::string>();
    info.crc32 = f.at("crc32").get<std::uint32_t>();
    info.lines = f.at("lines").get<std::uint64_t>();
    info.bytes = f.at("bytes").get<std::uint64_t>();
    m.files.push_back(std::move(info));
  }
  return m;
}

struct PartitionWriter::Impl {
  gzFile gz = nullptr;
  std::string name;
  std::string buf;
  PartitionInfo info;

  static constexpr std::size_t kFlushAt = 1u << 18;

  void flush() {
    if (buf.empty()) return;
    info.crc32 = static_cast<std::uint32_t>(
        crc32(info.crc32, reinterpret_cast<const Bytef*>(buf.data()),
              static_cast<uInt>(buf.size())));
    info.bytes += buf.size();
    if (gzwrite(gz, buf.data(), static_cast<unsigned>(buf.size())) <= 0)
      throw std::runtime_error("write failed for partition " + name);
    buf.clear();
  }
};

PartitionWriter::PartitionWriter(const std::filesystem::path& file)
    : impl_(std::make_unique<Impl>()) {
  impl_->name = file.filename().string();
  impl_->info.name = impl_->name;
  impl_->gz = gzopen(file.string().c_str(), "wb1");
  if (impl_->gz == nullptr)
    throw std::runtime_error("cannot create partition " + file.string());
}

PartitionWriter::~PartitionWriter() {
  if (impl_ && impl_->gz != nullptr) gzclose(impl_->gz);
}

PartitionWriter::PartitionWriter(PartitionWriter&&) noexcept = default;
PartitionWriter& PartitionWriter::operator=(PartitionWriter&&) noexcept =
    default;

void PartitionWriter::add(std::string_view domain, std::string_view url_key,
                          Instant ts, int status, std::int64_t size) {
  std::string& buf = impl_->buf;
  buf.append(domain);
  buf += '\t';
  buf.append(url_key);
  buf += '\t';
  buf += format_timestamp14(ts);
  buf += '\t';
  if (status >= 0) append_int(buf, status);
  else buf += '-';
  buf += '\t';
  if (size >= 0) append_int(buf, size);
  else buf += '-';
  buf += '\n';
  impl_->info.lines += 1;
  if (buf.size() >= Impl::kFlushAt) impl_->flush();
}

PartitionInfo PartitionWriter::finish() {
  impl_->flush();
  if (gzclose(impl_->gz) != Z_OK) {
    impl_->gz = nullptr;
    throw std::runtime_error("close failed for partition " + impl_->name);
  }
  impl_->gz = nullptr;
  return impl_->info;
}

IndexManifest write_index(const std::vector<DomainTimeline>& timelines,
                          const std::filesystem::path& dir, int partitions) {
  std::filesystem::create_directories(dir);
  IndexManifest manifest;
  manifest.partitions = partitions;

  // group timelines per partition, keep (domain, url, ts) order
  std::vector<std::vector<const DomainTimeline*>> buckets(
      static_cast<std::size_t>(partitions));
  for (const auto& t : timelines)
    buckets[partition_of(t.domain, partitions)].push_back(&t);
  for (auto& bucket : buckets) {
    std::sort(bucket.begin(), bucket.end(),
              [](const DomainTimeline* a, const DomainTimeline* b) {
                return a->domain < b->domain;
              });
  }

  char name[32];
  for (int p = 0; p < partitions; ++p) {
    std::snprintf(name, sizeof(name), "part-%04d.gz", p);
    PartitionWriter writer(dir / name);
    for (const DomainTimeline* t : buckets[static_cast<std::size_t>(p)]) {
      for (const UrlHistory& url : t->urls) {
        for (const Capture& c : url.captures)
          writer.add(t->domain, url.url_key, c.ts, c.status, c.size);
      }
    }
    manifest.files.push_back(writer.finish());
  }
  manifest.save(dir);
  return manifest;
}

struct IndexReader::Impl {
  std::filesystem::path dir;
  IndexManifest manifest;
  std::size_t file_idx = 0;
  std::size_t file_end = 0;

  gzFile gz = nullptr;
  std::uint32_t crc = 0;
  std::uint64_t lines = 0;
  std::uint64_t bytes = 0;
  std::vector<char> buf;
  std::size_t begin = 0, end = 0;
  bool eof = false;

  // lookahead row belonging to the next domain
  bool have_pending = false;
  std::string pending_domain;
  UrlHistory pending_url;
  Capture pending_cap;

  explicit Impl(const std::filesystem::path& d)
      : dir(d), manifest(IndexManifest::load(d)) {
    file_end = manifest.files.size();
    buf.resize(1u << 20);
  }

  ~Impl() {
    if (gz != nullptr) gzclose(gz);
  }

  bool open_next_file() {
    if (file_idx >= file_end) return false;
    const auto& info = manifest.files[file_idx];
    gz = gzopen((dir / info.name).string().c_str(), "rb");
    if (gz == nullptr)
      throw IndexCorruptError("missing partition " + info.name);
    gzbuffer(gz, 256 * 1024);
    crc = 0;
    lines = 0;
    bytes = 0;
    begin = end = 0;
    eof = false;
    return true;
  }

  void close_current_file() {
    const auto& info = manifest.files[file_idx];
    gzclose(gz);
    gz = nullptr;
    if (lines != info.lines || crc != info.crc32 || bytes != info.bytes)
      throw IndexCorruptError("partition " + info.name +
                              " fails checksum verification");
    ++file_idx;
  }

  bool fill() {
    if (begin > 0) {
      std::memmove(buf.data(), buf.data() + begin, end - begin);
      end -= begin;
      begin = 0;
    }
    if (end == buf.size()) buf.resize(buf.size() * 2);
    int got = gzread(gz, buf.data() + end,
                     static_cast<unsigned>(buf.size() - end));
    if (got < 0) {
      int errnum = 0;
      gzerror(gz, &errnum);
      throw IndexCorruptError("partition " +
                              manifest.files[file_idx].name +
                              " is truncated or corrupt");
    }
    if (got == 0) {
      // distinguish clean EOF from a truncated gzip stream
      if (!gzeof(gz))
        throw IndexCorruptError("partition " +
                                manifest.files[file_idx].name +
                                " is truncated or corrupt");
      eof = true;
    } else {
      crc = static_cast<std::uint32_t>(
          crc32(crc, reinterpret_cast<const Bytef*>(buf.data() + end),
                static_cast<uInt>(got)));
      bytes += static_cast<std::uint64_t>(got);
    }
    end += static_cast<std::size_t>(got);
    return end > begin;
  }

  // next line in the current partition; false at its end
  bool next_line(std::string_view& line) {
    while (true) {
      const char* nl = static_cast<const char*>(
          std::memchr(buf.data() + begin, '\n', end - begin));
      if (nl != nullptr) {
        std::size_t len = static_cast<std::size_t>(nl - (buf.data() + begin));
        line = std::string_view(buf.data() + begin, len);
        begin += len + 1;
        lines += 1;
        return true;
      }
      if (eof) {
        if (end > begin)
          throw IndexCorruptError("partition " +
                                  manifest.files[file_idx].name +
                                  " ends mid-line");
        return false;
      }
      fill();
    }
  }

  static void parse_row(std::string_view line, std::string_view& domain,
                        std::string_view& url_key, Capture& cap) {
    std::array<std::string_view, 5> cols;
    std::size_t pos = 0;
    for (int i = 0; i < 5; ++i) {
      auto tab = line.find('\t', pos);
      if (tab == std::string_view::npos) {
        if (i != 4) throw IndexCorruptError("malformed index row");
        cols[static_cast<std::size_t>(i)] = line.substr(pos);
        break;
      }
      cols[static_cast<std::size_t>(i)] = line.substr(pos, tab - pos);
      pos = tab + 1;
    }
    domain = cols[0];
    url_key = cols[1];
    auto ts = parse_timestamp14(cols[2]);
    if (!ts) throw IndexCorruptError("malformed index timestamp");
    cap.ts = *ts;
    if (cols[3] == "-") {
      cap.status = -1;
    } else {
      int v = 0;
      const char* first = cols[3].data();
      const char* last = first + cols[3].size();
      auto [p, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || p != last)
        throw IndexCorruptError("malformed index status");
      cap.status = v;
    }
    if (cols[4] == "-") {
      cap.size = -1;
    } else {
      std::int64_t v = 0;
      const char* first = cols[4].data();
      const char* last = first + cols[4].size();
      auto [p, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || p != last)
        throw IndexCorruptError("malformed index size");
      cap.size = v;
    }
  }
};

IndexReader::IndexReader(const std::filesystem::path& dir)
    : impl_(std::make_unique<Impl>(dir)) {}

IndexReader::IndexReader(const std::filesystem::path& dir,
                         std::size_t file_begin, std::size_t file_end)
    : impl_(std::make_unique<Impl>(dir)) {
  impl_->file_idx = std::min(file_begin, impl_->manifest.files.size());
  impl_->file_end = std::min(file_end, impl_->manifest.files.size());
}

IndexReader::~IndexReader() = default;

const IndexManifest& IndexReader::manifest() const { return impl_->manifest; }

bool IndexReader::next_timeline(DomainTimeline& out) {
  Impl& im = *impl_;
  out.domain.clear();
  out.urls.clear();

  if (im.have_pending) {
    out.domain = im.pending_domain;
    out.urls.push_back(std::move(im.pending_url));
    out.urls.back().captures.push_back(im.pending_cap);
    im.have_pending = false;
  }

  while (true) {
    if (im.gz == nullptr) {
      if (!im.open_next_file()) return !out.domain.empty();
    }
    std::string_view line;
    if (!im.next_line(line)) {
      im.close_current_file();
      if (!out.domain.empty()) return true;  // domain ended with the file
      continue;
    }
    std::string_view domain, url_key;
    Capture cap;
    Impl::parse_row(line, domain, url_key, cap);

    if (out.domain.empty()) {
      out.domain.assign(domain);
    } else if (domain != out.domain) {
      im.have_pending = true;
      im.pending_domain.assign(domain);
      im.pending_url.url_key.assign(url_key);
      im.pending_url.captures.clear();
      im.pending_cap = cap;
      return true;
    }
    if (out.urls.empty() || out.urls.back().url_key != url_key) {
      out.urls.emplace_back();
      out.urls.back().url_key.assign(url_key);
    }
    out.urls.back().captures.push_back(cap);
  }
}

std::vector<DomainTimeline> read_index(const std::filesystem::path& dir) {
  IndexReader reader(dir);
  std::vector<DomainTimeline> timelines;
  DomainTimeline t;
  while (reader.next_timeline(t)) timelines.push_back(std::move(t));
  return timelines;
}

}  // namespace cdxstats
