#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cdxstats/lifespan.hpp"

namespace cdxstats {

// Per-domain, per-period property rows. Period membership follows the
// interval algebra
//   alive_whole: born before t_i, did not die before t_{i+1}
//   born:        born in [t_i, t_{i+1}), did not die before t_{i+1}
//   died:        born before t_i, died in [t_i, t_{i+1})
//   flashed:     born and died in [t_i, t_{i+1})
// For anniversary frames the period index of an instant is
// floor(age_months(origin, t) / 12), so day-clamped anniversaries (Feb 29
// origins) can never disagree with the month arithmetic.
struct EvolutionRow {
  std::int64_t index = 0;  // calendar year (Evolution) or age (DomainAge)
  std::uint64_t alive_whole = 0;
  std::uint64_t born = 0;
  std::uint64_t died = 0;
  std::uint64_t flashed = 0;
  std::int64_t size_end = 0;    // sum of size_at(t_{i+1}) over alive_end URLs
  std::int64_t born_size = 0;   // sum of birth sizes over born + flashed
  std::vector<std::int32_t> ages;  // months at t_{i+1}, ascending, one per
                                   // alive_end URL

  std::uint64_t alive_end() const { return alive_whole + born; }
};

struct UrlAgeRow {
  std::int64_t index = 0;  // age in full years
  std::uint64_t count = 0;  // died URLs that reached this age
  std::uint64_t died = 0;   // died at this age
  std::int64_t size_end = 0;         // size at end of period, survivors only
  std::int64_t died_size = 0;        // sizes at death of URLs dying here
  std::int64_t died_birth_size = 0;  // their sizes at birth
};

// One calendar-year row per year from max(first_year, birth year of the
// domain) through final_year.
std::vector<EvolutionRow> evolution_table(const DomainLife& domain,
                                          int first_year, int final_year);

// Anniversary periods anchored at the domain's first capture; rows cover
// every age whose period ends at or before Jan 1 of final_year + 1.
std::vector<EvolutionRow> domain_age_table(const DomainLife& domain,
                                           int final_year);

// URL-anniversary rows over the died URLs only; `include_censored` adds
// still-alive URLs to `count` (sensitivity switch, everything else
// unchanged).
std::vector<UrlAgeRow> url_age_table(const DomainLife& domain, int final_year,
                                     bool include_censored = false);

// Row lookup by calendar year; nullptr when the domain has no such row.
const EvolutionRow* row_for_year(const std::vector<EvolutionRow>& rows,
                                 std::int64_t year);

// Persisted form of the precomputed tables (TSV, one file per kind). Ages
// are run-length encoded as `months:count` pairs.
void write_evolution_tsv(const std::filesystem::path& file,
                         const std::vector<std::pair<std::string,
                             std::vector<EvolutionRow>>>& tables);
void write_url_age_tsv(const std::filesystem::path& file,
                       const std::vector<std::pair<std::string,
                           std::vector<UrlAgeRow>>>& tables);

}  // namespace cdxstats
