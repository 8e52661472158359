#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cdxstats/cdx.hpp"

namespace cdxstats {

// category -> registered domain catalog (the study population).
struct CatalogEntry {
  std::string category;
  std::string domain;
};

struct DomainCatalog {
  std::vector<CatalogEntry> entries;  // unique (category, domain) pairs
  std::string retrieval_note;

  // UTF-8 TSV `category<TAB>domain`, `#` comments and blank lines allowed.
  // Domains are lowercased and stripped to their registered domain under
  // `tld_suffix`; rows under other TLDs are dropped (counted in the note).
  static DomainCatalog load(const std::filesystem::path& path,
                            std::string_view tld_suffix);

  bool contains(std::string_view domain) const;
  std::vector<std::string> categories() const;           // sorted unique
  std::vector<std::string> domains() const;              // sorted unique
  std::vector<std::string> categories_of(std::string_view domain) const;
  std::size_t category_size(std::string_view category) const;

 private:
  std::set<std::string, std::less<>> domain_set_;
  friend DomainCatalog make_catalog(std::vector<CatalogEntry>);
};

// Builds a catalog from in-memory entries (tests, generator).
DomainCatalog make_catalog(std::vector<CatalogEntry> entries);

// Last two labels of `host` when it ends with `tld_suffix` (".de"), else
// nullopt. news.google.de -> google.de, google.de -> google.de.
std::optional<std::string> registered_domain(std::string_view host,
                                             std::string_view tld_suffix);

// Host of a canonical url key. SURT keys (`de,google,news)/path`) unreverse
// the label list; plain keys fall back to scheme://host or bare-host
// parsing. Returned lowercase, port stripped.
std::string host_from_url_key(std::string_view url_key);

// Path of the url key up to the query string, for embed-extension matching.
std::string_view path_of_url_key(std::string_view url_key);

// True when the path (before the query) ends in .jpg/.png/.gif/.css/.js,
// case-insensitive.
bool has_embed_extension(std::string_view url_key);

// One capture inside an index timeline: status/size use -1 for absent.
struct Capture {
  Instant ts = 0;
  int status = -1;
  std::int64_t size = -1;

  bool is_success() const { return status >= 200 && status < 300; }
  std::int64_t size_or_zero() const { return size >= 0 ? size : 0; }
  bool operator==(const Capture&) const = default;
};

struct UrlHistory {
  std::string url_key;
  std::vector<Capture> captures;  // ascending ts, ts unique

  bool operator==(const UrlHistory&) const = default;
};

struct DomainTimeline {
  std::string domain;
  std::vector<UrlHistory> urls;  // sorted by url_key

  bool operator==(const DomainTimeline&) const = default;
};

// Distinct hosts observed among the timeline's URLs.
std::set<std::string> host_set(const DomainTimeline& timeline);

// In-memory index build: keeps only records whose registered domain is in
// the catalog, groups by (domain, url_key), sorts captures by timestamp and
// keeps the first record of duplicate (url_key, timestamp) pairs. Output is
// sorted by domain and independent of input order apart from the duplicate
// rule, which follows the span order.
std::vector<DomainTimeline> build_index(std::span<const CaptureRecord> records,
                                        const DomainCatalog& catalog,
                                        std::string_view tld_suffix);

struct FilterOutcome {
  std::uint64_t kept_urls = 0;
  std::uint64_t dropped_extension = 0;
  std::uint64_t dropped_never_successful = 0;
  std::uint64_t dropped_not_crawled_final_year = 0;
  std::uint64_t dropped_single_success = 0;

  std::uint64_t total() const {
    return kept_urls + dropped_extension + dropped_never_successful +
           dropped_not_crawled_final_year + dropped_single_success;
  }
  FilterOutcome& operator+=(const FilterOutcome& o);
};

// Which cleaning rule drops this URL, if any. Rules apply in order:
// embed extension; no successful capture; unknown fate at dataset end (last
// capture successful but before the final year); single successful capture.
enum class FilterRule {
  Keep,
  Extension,
  NeverSuccessful,
  NotCrawledFinalYear,
  SingleSuccess,
};
FilterRule classify_url(std::string_view url_key,
                        std::span<const Capture> captures,
                        int dataset_final_year);

DomainTimeline apply_filters(const DomainTimeline& timeline,
                             int dataset_final_year, FilterOutcome& outcome);

}  // namespace cdxstats
