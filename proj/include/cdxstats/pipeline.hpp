#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cdxstats/cdx.hpp"
#include "cdxstats/corpus.hpp"
#include "cdxstats/fitting.hpp"
#include "cdxstats/index_io.hpp"
#include "cdxstats/metrics.hpp"

namespace cdxstats {

struct RunConfig {
  std::vector<std::filesystem::path> cdx_paths;  // files or directories
  std::filesystem::path catalog_path;
  std::filesystem::path index_dir;
  std::filesystem::path out_dir;
  int first_year = 1996;
  int final_year = 2013;
  std::string tld_suffix = ".de";
  bool include_censored_urlage = false;
  bool strict_parse = false;
  unsigned threads = 1;
  std::uint64_t seed = 42;
  int partitions = 16;
  std::uint64_t sort_buffer_bytes = 512ull << 20;
  std::filesystem::path external_series_path;  // optional overlay for §presence
  bool dump_tables = false;
};

struct BuildIndexResult {
  ParseReport parse_report;
  FilterOutcome filter_outcome;  // informational preview at final_year
  std::uint64_t domains = 0;
  std::uint64_t urls = 0;
  IndexManifest manifest;
};

// read_manifest + catalog filter + external sort + partition write.
// Throws StrictParseError in strict mode and std::runtime_error on I/O
// failures (including spill failures during the external sort).
BuildIndexResult run_build_index(const RunConfig& config);

// Derives one domain's analysis bundle from its unfiltered timeline:
// applies the cleaning rules, derives lifespans and all three property
// tables, and collects the dataset-summary bookkeeping.
DomainStats domain_stats_from_timeline(const DomainTimeline& timeline,
                                       const RunConfig& config,
                                       FilterOutcome& outcome);

struct AnalyzeResult {
  FilterOutcome filter_outcome;
  std::uint64_t domains = 0;
  std::vector<std::filesystem::path> csv_files;
};

// Reads the index, applies filters, computes all property tables, metric
// series and fits, and writes one CSV per metric group plus fits.csv and
// dataset_summary.csv into out_dir. Byte-identical output for any thread
// count.
AnalyzeResult run_analyze(const RunConfig& config);

// (year, count) overlay series, TSV or comma separated, `#` comments.
std::vector<std::pair<int, std::int64_t>> load_external_series(
    const std::filesystem::path& path);

struct FitRow {
  std::string metric;
  std::string model;
  std::vector<double> params;   // a, b[, c]
  std::vector<double> err_pct;
  double residual_rms = 0.0;
};

std::string render_fits_csv(std::span<const FitRow> rows);

// Loads one metric series out of a metrics CSV written by run_analyze.
// Returns (i, value) pairs sorted by i.
std::vector<std::pair<std::int64_t, double>> load_metric_series(
    const std::filesystem::path& csv, std::string_view frame,
    std::string_view metric, std::string_view category);

}  // namespace cdxstats
