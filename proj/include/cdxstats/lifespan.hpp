#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cdxstats/corpus.hpp"

namespace cdxstats {

// Derived lifespan of one URL. A URL is alive from its first capture until
// the first unsuccessful capture that has no later successful one; when the
// last capture is successful the URL is still alive (death empty). Only
// 2xx counts as successful anywhere in this project.
struct UrlLife {
  std::string url_key;
  Instant birth = 0;                      // first capture, any status
  std::optional<Instant> death;           // empty = alive at dataset end
  std::int64_t birth_size = 0;            // size at first successful capture
  std::optional<std::int64_t> death_size; // size at last successful capture

  // successful captures only: (ts, stored size), ascending ts
  struct SizePoint {
    Instant ts;
    std::int64_t size;
  };
  std::vector<SizePoint> size_history;

  bool alive_at(Instant t) const {
    return birth <= t && (!death || *death > t);
  }
  // size of the last successful capture at or before t (0 before the first)
  std::int64_t size_at(Instant t) const;
};

// Requires a non-empty, ascending capture list.
UrlLife derive_life(const UrlHistory& url);

// Anniversary-based age index: floor(age_months / 12) at `at`.
int url_age_years(const UrlLife& life, Instant at);

struct DomainLife {
  std::string domain;
  Instant birth = 0;  // min of the URLs' first captures
  std::vector<UrlLife> urls;
};

DomainLife derive_domain_life(const DomainTimeline& timeline);

}  // namespace cdxstats
