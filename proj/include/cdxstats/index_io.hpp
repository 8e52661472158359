#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdxstats/corpus.hpp"

namespace cdxstats {

// On-disk domain index: a fixed number of GZip-compressed text partitions
// (domain routed by FNV-1a hash), each sorted by (domain, url_key,
// timestamp) with line format
//   domain<TAB>url_key<TAB>timestamp14<TAB>status|-<TAB>size|-
// plus a sidecar manifest carrying version, partition count and per-
// partition checksums of the uncompressed bytes.

inline constexpr int kIndexVersion = 1;
inline constexpr const char* kIndexManifestName = "index.json";

struct PartitionInfo {
  std::string name;
  std::uint32_t crc32 = 0;
  std::uint64_t lines = 0;
  std::uint64_t bytes = 0;  // uncompressed
};

struct IndexManifest {
  int version = kIndexVersion;
  int partitions = 0;
  std::vector<PartitionInfo> files;

  void save(const std::filesystem::path& dir) const;
  static IndexManifest load(const std::filesystem::path& dir);
};

class IndexCorruptError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint32_t partition_of(std::string_view domain, int partitions);

// Streams sorted entries into one gz partition file. Rows must arrive in
// (domain, url_key, ts) order; this class only formats and checksums.
class PartitionWriter {
 public:
  PartitionWriter(const std::filesystem::path& file);
  ~PartitionWriter();
  PartitionWriter(PartitionWriter&&) noexcept;
  PartitionWriter& operator=(PartitionWriter&&) noexcept;

  void add(std::string_view domain, std::string_view url_key, Instant ts,
           int status, std::int64_t size);
  PartitionInfo finish();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Writes whole timelines through the partition writers and the manifest.
IndexManifest write_index(const std::vector<DomainTimeline>& timelines,
                          const std::filesystem::path& dir, int partitions);

// Streams timelines back, one whole domain at a time, verifying line counts
// and checksums per partition. Throws IndexCorruptError on mismatch or on a
// version the reader does not understand.
class IndexReader {
 public:
  explicit IndexReader(const std::filesystem::path& dir);
  // restricts the stream to manifest files [file_begin, file_end)
  IndexReader(const std::filesystem::path& dir, std::size_t file_begin,
              std::size_t file_end);
  ~IndexReader();

  bool next_timeline(DomainTimeline& out);
  const IndexManifest& manifest() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::vector<DomainTimeline> read_index(const std::filesystem::path& dir);

}  // namespace cdxstats
