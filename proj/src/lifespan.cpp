#include "cdxstats/lifespan.hpp"

#include <algorithm>
#include <stdexcept>

namespace cdxstats {

std::int64_t UrlLife::size_at(Instant t) const {
  // last successful capture at or before t
  auto it = std::upper_bound(
      size_history.begin(), size_history.end(), t,
      [](Instant v, const SizePoint& p) { return v < p.ts; });
  if (it == size_history.begin()) return 0;
  return std::prev(it)->size;
}

UrlLife derive_life(const UrlHistory& url) {
  if (url.captures.empty())
    throw std::invalid_argument("derive_life: empty capture list");

  UrlLife life;
  life.url_key = url.url_key;
  life.birth = url.captures.front().ts;

  bool have_birth_size = false;
  for (const Capture& c : url.captures) {
    if (!c.is_success()) continue;
    if (!have_birth_size) {
      life.birth_size = c.size_or_zero();
      have_birth_size = true;
    }
    life.size_history.push_back({c.ts, c.size_or_zero()});
  }

  if (!url.captures.back().is_success()) {
    // death = first capture of the maximal all-unsuccessful suffix
    std::size_t i = url.captures.size();
    while (i > 0 && !url.captures[i - 1].is_success()) --i;
    life.death = url.captures[i].ts;
    if (!life.size_history.empty())
      life.death_size = life.size_history.back().size;
  }
  return life;
}

int url_age_years(const UrlLife& life, Instant at) {
  return year_index(life.birth, at);
}

DomainLife derive_domain_life(const DomainTimeline& timeline) {
  DomainLife d;
  d.domain = timeline.domain;
  d.urls.reserve(timeline.urls.size());
  for (const UrlHistory& url : timeline.urls)
    d.urls.push_back(derive_life(url));
  if (!d.urls.empty()) {
    d.birth = d.urls.front().birth;
    for (const UrlLife& u : d.urls) d.birth = std::min(d.birth, u.birth);
  }
  return d;
}

}  // namespace cdxstats
