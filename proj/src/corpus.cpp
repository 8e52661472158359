#include "cdxstats/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <stdexcept>

namespace cdxstats {

namespace {

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool ends_with_ci(std::string_view s, std::string_view suffix) {
  if (s.size() < suffix.size()) return false;
  for (std::size_t i = 0; i < suffix.size(); ++i) {
    char a = static_cast<char>(
        std::tolower(static_cast<unsigned char>(s[s.size() - suffix.size() + i])));
    if (a != suffix[i]) return false;
  }
  return true;
}

}  // namespace

DomainCatalog make_catalog(std::vector<CatalogEntry> entries) {
  DomainCatalog catalog;
  std::set<std::pair<std::string, std::string>> seen;
  for (auto& e : entries) {
    auto key = std::make_pair(e.category, e.domain);
    if (!seen.insert(key).second) continue;
    catalog.domain_set_.insert(e.domain);
    catalog.entries.push_back(std::move(e));
  }
  return catalog;
}

DomainCatalog DomainCatalog::load(const std::filesystem::path& path,
                                  std::string_view tld_suffix) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open catalog " + path.string());
  std::vector<CatalogEntry> entries;
  std::string line;
  std::size_t dropped_tld = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("catalog line without tab: " + line);
    std::string category = line.substr(0, tab);
    std::string raw_domain = to_lower(line.substr(tab + 1));
    auto domain = registered_domain(raw_domain, tld_suffix);
    if (!domain) {
      ++dropped_tld;
      continue;
    }
    entries.push_back({std::move(category), std::move(*domain)});
  }
  DomainCatalog catalog = make_catalog(std::move(entries));
  catalog.retrieval_note = path.string() + " (" +
                           std::to_string(catalog.entries.size()) +
                           " entries, " + std::to_string(dropped_tld) +
                           " outside " + std::string(tld_suffix) + ")";
  return catalog;
}

bool DomainCatalog::contains(std::string_view domain) const {
  return domain_set_.find(domain) != domain_set_.end();
}

std::vector<std::string> DomainCatalog::categories() const {
  std::set<std::string> cats;
  for (const auto& e : entries) cats.insert(e.category);
  return {cats.begin(), cats.end()};
}

std::vector<std::string> DomainCatalog::domains() const {
  return {domain_set_.begin(), domain_set_.end()};
}

std::vector<std::string> DomainCatalog::categories_of(
    std::string_view domain) const {
  std::set<std::string> cats;
  for (const auto& e : entries)
    if (e.domain == domain) cats.insert(e.category);
  return {cats.begin(), cats.end()};
}

std::size_t DomainCatalog::category_size(std::string_view category) const {
  std::size_t n = 0;
  for (const auto& e : entries)
    if (e.category == category) ++n;
  return n;
}

std::optional<std::string> registered_domain(std::string_view host,
                                             std::string_view tld_suffix) {
  if (host.size() <= tld_suffix.size()) return std::nullopt;
  if (!host.ends_with(tld_suffix)) return std::nullopt;
  std::size_t label_end = host.size() - tld_suffix.size();
  std::size_t dot = host.rfind('.', label_end - 1);
  std::size_t label_start = (dot == std::string_view::npos) ? 0 : dot + 1;
  if (label_start >= label_end) return std::nullopt;  // empty label
  return std::string(host.substr(label_start));
}

std::string host_from_url_key(std::string_view url_key) {
  auto paren = url_key.find(')');
  if (paren != std::string_view::npos &&
      url_key.find('/') > paren) {  // SURT: labels before ')'
    std::string_view labels = url_key.substr(0, paren);
    auto colon = labels.find(':');  // port
    if (colon != std::string_view::npos) labels = labels.substr(0, colon);
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (true) {
      auto comma = labels.find(',', pos);
      if (comma == std::string_view::npos) {
        parts.push_back(labels.substr(pos));
        break;
      }
      parts.push_back(labels.substr(pos, comma - pos));
      pos = comma + 1;
    }
    std::string host;
    host.reserve(labels.size());
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
      if (!host.empty()) host += '.';
      host.append(*it);
    }
    return to_lower(host);
  }
  // plain url or bare host
  std::string_view rest = url_key;
  auto scheme = rest.find("://");
  if (scheme != std::string_view::npos) rest = rest.substr(scheme + 3);
  auto host_end = rest.find_first_of("/?#:");
  if (host_end != std::string_view::npos) rest = rest.substr(0, host_end);
  return to_lower(rest);
}

std::string_view path_of_url_key(std::string_view url_key) {
  auto paren = url_key.find(')');
  std::string_view rest;
  if (paren != std::string_view::npos && url_key.find('/') > paren) {
    rest = url_key.substr(paren + 1);
  } else {
    std::string_view tail = url_key;
    auto scheme = tail.find("://");
    if (scheme != std::string_view::npos) tail = tail.substr(scheme + 3);
    auto slash = tail.find('/');
    rest = (slash == std::string_view::npos) ? std::string_view{}
                                             : tail.substr(slash);
  }
  auto query = rest.find_first_of("?#");
  if (query != std::string_view::npos) rest = rest.substr(0, query);
  return rest;
}

bool has_embed_extension(std::string_view url_key) {
  static constexpr std::string_view kExtensions[] = {".jpg", ".png", ".gif",
                                                     ".css", ".js"};
  std::string_view path = path_of_url_key(url_key);
  for (std::string_view ext : kExtensions)
    if (ends_with_ci(path, ext)) return true;
  return false;
}

std::set<std::string> host_set(const DomainTimeline& timeline) {
  std::set<std::string> hosts;
  for (const auto& url : timeline.urls)
    hosts.insert(host_from_url_key(url.url_key));
  return hosts;
}

std::vector<DomainTimeline> build_index(std::span<const CaptureRecord> records,
                                        const DomainCatalog& catalog,
                                        std::string_view tld_suffix) {
  std::map<std::string, std::map<std::string, std::map<Instant, Capture>>>
      grouped;
  for (const CaptureRecord& rec : records) {
    std::string host = host_from_url_key(rec.canonical_url);
    auto domain = registered_domain(host, tld_suffix);
    if (!domain || !catalog.contains(*domain)) continue;
    auto& url_map = grouped[*domain][rec.canonical_url];
    // duplicate (url_key, timestamp): first occurrence wins
    url_map.emplace(rec.timestamp, Capture{rec.timestamp, rec.status, rec.size});
  }
  std::vector<DomainTimeline> timelines;
  timelines.reserve(grouped.size());
  for (auto& [domain, urls] : grouped) {
    DomainTimeline t;
    t.domain = domain;
    t.urls.reserve(urls.size());
    for (auto& [url_key, captures] : urls) {
      UrlHistory h;
      h.url_key = url_key;
      h.captures.reserve(captures.size());
      for (auto& [ts, cap] : captures) h.captures.push_back(cap);
      t.urls.push_back(std::move(h));
    }
    timelines.push_back(std::move(t));
  }
  return timelines;
}

FilterOutcome& FilterOutcome::operator+=(const FilterOutcome& o) {
  kept_urls += o.kept_urls;
  dropped_extension += o.dropped_extension;
  dropped_never_successful += o.dropped_never_successful;
  dropped_not_crawled_final_year += o.dropped_not_crawled_final_year;
  dropped_single_success += o.dropped_single_success;
  return *this;
}

FilterRule classify_url(std::string_view url_key,
                        std::span<const Capture> captures,
                        int dataset_final_year) {
  if (has_embed_extension(url_key)) return FilterRule::Extension;

  std::size_t successes = 0;
  for (const Capture& c : captures)
    if (c.is_success()) ++successes;
  if (successes == 0) return FilterRule::NeverSuccessful;

  const Capture& last = captures.back();
  if (last.is_success() && year_of(last.ts) < dataset_final_year)
    return FilterRule::NotCrawledFinalYear;

  if (successes == 1) return FilterRule::SingleSuccess;
  return FilterRule::Keep;
}

DomainTimeline apply_filters(const DomainTimeline& timeline,
                             int dataset_final_year, FilterOutcome& outcome) {
  DomainTimeline kept;
  kept.domain = timeline.domain;
  for (const UrlHistory& url : timeline.urls) {
    switch (classify_url(url.url_key, url.captures, dataset_final_year)) {
      case FilterRule::Keep:
        ++outcome.kept_urls;
        kept.urls.push_back(url);
        break;
      case FilterRule::Extension:
        ++outcome.dropped_extension;
        break;
      case FilterRule::NeverSuccessful:
        ++outcome.dropped_never_successful;
        break;
      case FilterRule::NotCrawledFinalYear:
        ++outcome.dropped_not_crawled_final_year;
        break;
      case FilterRule::SingleSuccess:
        ++outcome.dropped_single_success;
        break;
    }
  }
  return kept;
}

}  // namespace cdxstats
