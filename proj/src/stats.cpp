#include "cdxstats/stats.hpp"

#include <algorithm>
#include <fstream>
#include <map>

namespace cdxstats {

namespace {

// Shared row-filling for both one-year period framings. `period_of_birth`
// and `period_of_death` map instants to period indices; `period_end` gives
// the measurement instant t_{i+1}.
template <typename PeriodOfFn, typename PeriodEndFn>
std::vector<EvolutionRow> fill_rows(const DomainLife& domain,
                                    std::int64_t first_index,
                                    std::int64_t last_index,
                                    PeriodOfFn period_of,
                                    PeriodEndFn period_end) {
  std::vector<EvolutionRow> rows;
  if (last_index < first_index) return rows;
  rows.resize(static_cast<std::size_t>(last_index - first_index + 1));
  for (std::size_t k = 0; k < rows.size(); ++k)
    rows[k].index = first_index + static_cast<std::int64_t>(k);

  for (const UrlLife& url : domain.urls) {
    std::int64_t birth_p = period_of(url.birth);
    std::int64_t death_p = url.death ? period_of(*url.death) : last_index;
    std::int64_t lo = std::max(first_index, birth_p);
    std::int64_t hi = std::min(last_index, death_p);
    for (std::int64_t i = lo; i <= hi; ++i) {
      EvolutionRow& row = rows[static_cast<std::size_t>(i - first_index)];
      bool born_in = birth_p == i;
      bool dies_in = url.death && death_p == i;
      if (born_in && dies_in) {
        row.flashed += 1;
        row.born_size += url.birth_size;
      } else if (born_in) {
        row.born += 1;
        row.born_size += url.birth_size;
      } else if (dies_in) {
        row.died += 1;
      } else {
        row.alive_whole += 1;
      }
      if (!dies_in) {
        Instant at = period_end(i);
        row.ages.push_back(age_months(url.birth, at));
        row.size_end += url.size_at(at);
      }
    }
  }
  for (auto& row : rows) std::sort(row.ages.begin(), row.ages.end());
  return rows;
}

}  // namespace

std::vector<EvolutionRow> evolution_table(const DomainLife& domain,
                                          int first_year, int final_year) {
  if (domain.urls.empty()) return {};
  int y0 = std::max(first_year, year_of(domain.birth));
  return fill_rows(
      domain, y0, final_year,
      [](Instant t) { return static_cast<std::int64_t>(year_of(t)); },
      [](std::int64_t i) { return year_start(static_cast<int>(i) + 1); });
}

std::vector<EvolutionRow> domain_age_table(const DomainLife& domain,
                                           int final_year) {
  if (domain.urls.empty()) return {};
  const Instant origin = domain.birth;
  const Instant dataset_end = year_start(final_year + 1);
  // last fully covered age: period end at or before the dataset end
  std::int64_t last_age = -1;
  while (anniversary(origin, static_cast<int>(last_age) + 2) <= dataset_end)
    ++last_age;
  return fill_rows(
      domain, 0, last_age,
      [origin](Instant t) {
        return static_cast<std::int64_t>(year_index(origin, t));
      },
      [origin](std::int64_t i) {
        return anniversary(origin, static_cast<int>(i) + 1);
      });
}

std::vector<UrlAgeRow> url_age_table(const DomainLife& domain, int final_year,
                                     bool include_censored) {
  std::vector<UrlAgeRow> rows;
  auto row_at = [&rows](std::int64_t i) -> UrlAgeRow& {
    if (rows.size() <= static_cast<std::size_t>(i)) {
      std::size_t old = rows.size();
      rows.resize(static_cast<std::size_t>(i) + 1);
      for (std::size_t k = old; k < rows.size(); ++k)
        rows[k].index = static_cast<std::int64_t>(k);
    }
    return rows[static_cast<std::size_t>(i)];
  };

  const Instant dataset_end = year_start(final_year + 1);
  for (const UrlLife& url : domain.urls) {
    if (!url.death) {
      if (include_censored) {
        std::int64_t reached = year_index(url.birth, dataset_end);
        for (std::int64_t i = 0; i <= reached; ++i) row_at(i).count += 1;
      }
      continue;
    }
    std::int64_t age_at_death = year_index(url.birth, *url.death);
    for (std::int64_t i = 0; i <= age_at_death; ++i) {
      UrlAgeRow& row = row_at(i);
      row.count += 1;
      if (i == age_at_death) {
        row.died += 1;
        row.died_size += url.death_size.value_or(0);
        row.died_birth_size += url.birth_size;
      } else {
        row.size_end +=
            url.size_at(anniversary(url.birth, static_cast<int>(i) + 1));
      }
    }
  }
  return rows;
}

const EvolutionRow* row_for_year(const std::vector<EvolutionRow>& rows,
                                 std::int64_t year) {
  if (rows.empty() || year < rows.front().index || year > rows.back().index)
    return nullptr;
  return &rows[static_cast<std::size_t>(year - rows.front().index)];
}

void write_evolution_tsv(
    const std::filesystem::path& file,
    const std::vector<std::pair<std::string, std::vector<EvolutionRow>>>&
        tables) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "domain\ti\talive_p\tborn\tdied\tflashed\tsize_end\tborn_size\t"
         "ages_rle\n";
  for (const auto& [domain, rows] : tables) {
    for (const EvolutionRow& r : rows) {
      out << domain << '\t' << r.index << '\t' << r.alive_whole << '\t'
          << r.born << '\t' << r.died << '\t' << r.flashed << '\t'
          << r.size_end << '\t' << r.born_size << '\t';
      // run-length encode the sorted ages as months:count
      std::size_t i = 0;
      bool first = true;
      while (i < r.ages.size()) {
        std::size_t j = i;
        while (j < r.ages.size() && r.ages[j] == r.ages[i]) ++j;
        if (!first) out << ',';
        out << r.ages[i] << ':' << (j - i);
        first = false;
        i = j;
      }
      out << '\n';
    }
  }
}

void write_url_age_tsv(
    const std::filesystem::path& file,
    const std::vector<std::pair<std::string, std::vector<UrlAgeRow>>>&
        tables) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "domain\ti\tcount\tdied\tsize_end\tdied_size\tdied_birth_size\n";
  for (const auto& [domain, rows] : tables) {
    for (const UrlAgeRow& r : rows) {
      out << domain << '\t' << r.index << '\t' << r.count << '\t' << r.died
          << '\t' << r.size_end << '\t' << r.died_size << '\t'
          << r.died_birth_size << '\n';
    }
  }
}

}  // namespace cdxstats
