#include "cdxstats/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>

#include "cdxstats/kernels.hpp"

namespace cdxstats {

namespace {

constexpr std::int32_t kLongLivingMonths = 60;  // "older than five years"

struct CategoryView {
  std::string name;
  std::vector<const DomainStats*> members;  // sorted by domain name
  std::uint64_t catalog_size = 0;           // incl. domains without data
};

std::vector<CategoryView> build_categories(std::span<const DomainStats> stats,
                                           const DomainCatalog& catalog) {
  std::map<std::string_view, const DomainStats*> by_name;
  for (const DomainStats& s : stats) by_name.emplace(s.domain, &s);

  std::vector<CategoryView> views;
  for (const std::string& cat : catalog.categories()) {
    CategoryView view;
    view.name = cat;
    std::set<std::string_view> seen;
    for (const CatalogEntry& e : catalog.entries) {
      if (e.category != cat || !seen.insert(e.domain).second) continue;
      view.catalog_size += 1;
      auto it = by_name.find(e.domain);
      if (it != by_name.end()) view.members.push_back(it->second);
    }
    std::sort(view.members.begin(), view.members.end(),
              [](const DomainStats* a, const DomainStats* b) {
                return a->domain < b->domain;
              });
    views.push_back(std::move(view));
  }

  CategoryView overall;
  overall.name = "overall";
  overall.catalog_size = catalog.domains().size();
  for (const DomainStats& s : stats) overall.members.push_back(&s);
  views.push_back(std::move(overall));

  std::sort(views.begin(), views.end(),
            [](const CategoryView& a, const CategoryView& b) {
              return a.name < b.name;
            });
  return views;
}

bool in_evolution_cohort(const DomainStats& d, std::int64_t year) {
  return year_of(d.birth) <= year;
}

std::int64_t max_domain_age_rows(const CategoryView& view) {
  std::size_t n = 0;
  for (const DomainStats* d : view.members)
    n = std::max(n, d->domain_age.size());
  return static_cast<std::int64_t>(n);
}

std::int64_t max_url_age_rows(const CategoryView& view) {
  std::size_t n = 0;
  for (const DomainStats* d : view.members)
    n = std::max(n, d->url_age.size());
  return static_cast<std::int64_t>(n);
}

void sort_points(MetricSeries& s) {
  std::sort(s.points.begin(), s.points.end(),
            [](const MetricPoint& a, const MetricPoint& b) {
              if (a.category != b.category) return a.category < b.category;
              return a.i < b.i;
            });
}

}  // namespace

std::string_view frame_name(Frame f) {
  switch (f) {
    case Frame::Evolution: return "evolution";
    case Frame::DomainAge: return "domain_age";
    case Frame::UrlAge: return "url_age";
  }
  return "?";
}

std::pair<std::int32_t, std::int32_t> bucket_month_range(int bucket) {
  std::int32_t lo = 12 * bucket;
  std::int32_t hi = bucket == kAgeBuckets - 1
                        ? std::numeric_limits<std::int32_t>::max()
                        : 12 * (bucket + 1);
  return {lo, hi};
}

MetricSeries age_death_distribution(std::span<const DomainStats> stats,
                                    const DomainCatalog& catalog) {
  MetricSeries series{"age_death_distribution", Frame::UrlAge, {}};
  for (const CategoryView& view : build_categories(stats, catalog)) {
    std::int64_t n_ages = max_url_age_rows(view);
    for (std::int64_t age = 0; age < n_ages; ++age) {
      double sum = 0.0;
      std::uint64_t n = 0;
      for (const DomainStats* d : view.members) {
        if (static_cast<std::int64_t>(d->url_age.size()) <= age) continue;
        const UrlAgeRow& row = d->url_age[static_cast<std::size_t>(age)];
        if (row.count == 0) continue;
        sum += static_cast<double>(row.died) / static_cast<double>(row.count);
        ++n;
      }
      if (n == 0) continue;
      series.points.push_back(
          {age, view.name, sum / static_cast<double>(n), n});
    }
  }
  sort_points(series);
  return series;
}

std::vector<MetricSeries> age_bucket_totals(std::span<const DomainStats> stats,
                                            const DomainCatalog& catalog,
                                            const MetricsOptions& options) {
  const auto& ops = kernels::active_ops();
  std::vector<MetricSeries> result;
  for (int b = 0; b < kAgeBuckets; ++b) {
    result.push_back(
        {"bucket_" + std::to_string(b), Frame::Evolution, {}});
  }
  for (const CategoryView& view : build_categories(stats, catalog)) {
    for (int year = options.first_year; year <= options.final_year; ++year) {
      std::uint64_t counts[kAgeBuckets] = {};
      std::uint64_t n = 0;
      for (const DomainStats* d : view.members) {
        if (!in_evolution_cohort(*d, year)) continue;
        ++n;
        const EvolutionRow* row = row_for_year(d->evolution, year);
        if (row == nullptr) continue;
        for (int b = 0; b < kAgeBuckets; ++b) {
          auto [lo, hi] = bucket_month_range(b);
          counts[b] += ops.count_in_range(row->ages.data(), row->ages.size(),
                                          lo, hi);
        }
      }
      if (n == 0) continue;
      for (int b = 0; b < kAgeBuckets; ++b) {
        result[static_cast<std::size_t>(b)].points.push_back(
            {year, view.name, static_cast<double>(counts[b]), n});
      }
    }
  }
  for (auto& s : result) sort_points(s);
  return result;
}

std::vector<MetricSeries> age_bucket_fractions(
    std::span<const DomainStats> stats, const DomainCatalog& catalog,
    const MetricsOptions& options) {
  const auto& ops = kernels::active_ops();
  std::vector<MetricSeries> result;
  for (int b = 0; b < kAgeBuckets; ++b) {
    result.push_back(
        {"bucket_" + std::to_string(b), Frame::Evolution, {}});
  }
  for (const CategoryView& view : build_categories(stats, catalog)) {
    for (int year = options.first_year; year <= options.final_year; ++year) {
      std::uint64_t counts[kAgeBuckets] = {};
      std::uint64_t alive = 0;
      std::uint64_t n = 0;
      for (const DomainStats* d : view.members) {
        if (!in_evolution_cohort(*d, year)) continue;
        ++n;
        const EvolutionRow* row = row_for_year(d->evolution, year);
        if (row == nullptr) continue;
        alive += row->alive_end();
        for (int b = 0; b < kAgeBuckets; ++b) {
          auto [lo, hi] = bucket_month_range(b);
          counts[b] += ops.count_in_range(row->ages.data(), row->ages.size(),
                                          lo, hi);
        }
      }
      if (n == 0 || alive == 0) continue;
      for (int b = 0; b < kAgeBuckets; ++b) {
        result[static_cast<std::size_t>(b)].points.push_back(
            {year, view.name,
             static_cast<double>(counts[b]) / static_cast<double>(alive), n});
      }
    }
  }
  for (auto& s : result) sort_points(s);
  return result;
}

MetricSeries average_age_evolution(std::span<const DomainStats> stats,
                                   const DomainCatalog& catalog,
                                   const MetricsOptions& options) {
  const auto& ops = kernels::active_ops();
  MetricSeries series{"average_age_months", Frame::Evolution, {}};
  for (const CategoryView& view : build_categories(stats, catalog)) {
    for (int year = options.first_year; year <= options.final_year; ++year) {
      std::int64_t age_sum = 0;
      std::uint64_t age_count = 0;
      std::uint64_t n = 0;
      for (const DomainStats* d : view.members) {
        if (!in_evolution_cohort(*d, year)) continue;
        ++n;
        const EvolutionRow* row = row_for_year(d->evolution, year);
        if (row == nullptr) continue;
        age_sum += ops.sum_i32(row->ages.data(), row->ages.size());
        age_count += row->ages.size();
      }
      if (n == 0 || age_count == 0) continue;
      series.points.push_back(
          {year, view.name,
           static_cast<double>(age_sum) / static_cast<double>(age_count), n});
    }
  }
  sort_points(series);
  return series;
}

std::vector<MetricSeries> long_living_average_age(
    std::span<const DomainStats> stats, const DomainCatalog& catalog,
    const MetricsOptions& options) {
  const auto& ops = kernels::active_ops();
  std::vector<MetricSeries> result;
  result.push_back({"long_living_average_age_months", Frame::Evolution, {}});
  result.push_back({"long_living_average_age_months", Frame::DomainAge, {}});

  for (const CategoryView& view : build_categories(stats, catalog)) {
    for (int year = options.first_year; year <= options.final_year; ++year) {
      std::int64_t sum = 0;
      std::uint64_t count = 0;
      std::uint64_t n = 0;
      for (const DomainStats* d : view.members) {
        if (!in_evolution_cohort(*d, year)) continue;
        ++n;
        const EvolutionRow* row = row_for_year(d->evolution, year);
        if (row == nullptr) continue;
        std::uint64_t c = 0;
        sum += ops.sum_above(row->ages.data(), row->ages.size(),
                             kLongLivingMonths, c);
        count += c;
      }
      if (n == 0 || count == 0) continue;  // no long-living URLs that year
      result[0].points.push_back(
          {year, view.name,
           static_cast<double>(sum) / static_cast<double>(count), n});
    }

    std::int64_t n_ages = max_domain_age_rows(view);
    for (std::int64_t age = 0; age < n_ages; ++age) {
      std::int64_t sum = 0;
      std::uint64_t count = 0;
      std::uint64_t n = 0;
      for (const DomainStats* d : view.members) {
        if (static_cast<std::int64_t>(d->domain_age.size()) <= age) continue;
        ++n;
        const EvolutionRow& row = d->domain_age[static_cast<std::size_t>(age)];
        std::uint64_t c = 0;
        sum += ops.sum_above(row.ages.data(), row.ages.size(),
                             kLongLivingMonths, c);
        count += c;
      }
      if (n == 0 || count == 0) continue;
      result[1].points.push_back(
          {age, view.name,
           static_cast<double>(sum) / static_cast<double>(count), n});
    }
  }
  for (auto& s : result) sort_points(s);
  return result;
}

std::vector<MetricSeries> total_volume_evolution(
    std::span<const DomainStats> stats, const DomainCatalog& catalog,
    const MetricsOptions& options) {
  std::vector<MetricSeries> result;
  result.push_back({"alive_end", Frame::Evolution, {}});
  result.push_back({"born", Frame::Evolution, {}});
  result.push_back({"died", Frame::Evolution, {}});
  result.push_back({"growth", Frame::Evolution, {}});
  for (const CategoryView& view : build_categories(stats, catalog)) {
    for (int year = options.first_year; year <= options.final_year; ++year) {
      std::uint64_t alive = 0, born = 0, died = 0;
      std::uint64_t n = 0;
      for (const DomainStats* d : view.members) {
        if (!in_evolution_cohort(*d, year)) continue;
        ++n;
        const EvolutionRow* row = row_for_year(d->evolution, year);
        if (row == nullptr) continue;
        alive += row->alive_end();
        born += row->born;
        died += row->died;
      }
      if (n == 0) continue;
      result[0].points.push_back(
          {year, view.name, static_cast<double>(alive), n});
      result[1].points.push_back(
          {year, view.name, static_cast<double>(born), n});
      result[2].points.push_back(
          {year, view.name, static_cast<double>(died), n});
      result[3].points.push_back(
          {year, view.name,
           static_cast<double>(born) - static_cast<double>(died), n});
    }
  }
  for (auto& s : result) sort_points(s);
  return result;
}

MetricSeries avg_domain_volume(std::span<const DomainStats> stats,
                               const DomainCatalog& catalog,
                               const MetricsOptions& options) {
  MetricSeries series{"avg_domain_volume", Frame::Evolution, {}};
  for (const CategoryView& view : build_categories(stats, catalog)) {
    for (int year = options.first_year; year <= options.final_year; ++year) {
      std::uint64_t alive = 0;
      std::uint64_t n = 0;
      for (const DomainStats* d : view.members) {
        if (!in_evolution_cohort(*d, year)) continue;
        ++n;
        const EvolutionRow* row = row_for_year(d->evolution, year);
        if (row != nullptr) alive += row->alive_end();
      }
      if (n == 0) continue;
      series.points.push_back(
          {year, view.name,
           static_cast<double>(alive) / static_cast<double>(n), n});
    }
  }
  sort_points(series);
  return series;
}

std::vector<MetricSeries> growth_rates(std::span<const DomainStats> stats,
                                       const DomainCatalog& catalog,
                                       const MetricsOptions& options) {
  std::vector<MetricSeries> result;
  result.push_back({"growth_rate", Frame::Evolution, {}});
  result.push_back({"birth_rate", Frame::Evolution, {}});
  result.push_back({"death_rate", Frame::Evolution, {}});
  result.push_back({"growth_rate", Frame::DomainAge, {}});
  result.push_back({"birth_rate", Frame::DomainAge, {}});
  result.push_back({"death_rate", Frame::DomainAge, {}});

  auto emit = [&result](std::size_t base, std::int64_t i,
                        const std::string& category, double growth,
                        double birth, double death, std::uint64_t n) {
    result[base + 0].points.push_back({i, category, growth, n});
    result[base + 1].points.push_back({i, category, birth, n});
    result[base + 2].points.push_back({i, category, death, n});
  };

  for (const CategoryView& view : build_categories(stats, catalog)) {
    for (int year = options.first_year; year <= options.final_year; ++year) {
      double growth = 0, birth = 0, death = 0;
      std::uint64_t n = 0, used = 0;
      for (const DomainStats* d : view.members) {
        if (!in_evolution_cohort(*d, year)) continue;
        ++n;
        const EvolutionRow* row = row_for_year(d->evolution, year);
        if (row == nullptr) continue;
        double denom =
            static_cast<double>(row->alive_whole) + static_cast<double>(row->died);
        if (denom == 0) continue;  // no population at period start
        growth += (static_cast<double>(row->born) -
                   static_cast<double>(row->died)) / denom;
        birth += static_cast<double>(row->born) / denom;
        death += static_cast<double>(row->died) / denom;
        ++used;
      }
      if (used == 0) continue;
      emit(0, year, view.name, growth / static_cast<double>(used),
           birth / static_cast<double>(used),
           death / static_cast<double>(used), n);
    }

    std::int64_t n_ages = max_domain_age_rows(view);
    for (std::int64_t age = 0; age < n_ages; ++age) {
      double growth = 0, birth = 0, death = 0;
      std::uint64_t n = 0, used = 0;
      for (const DomainStats* d : view.members) {
        if (static_cast<std::int64_t>(d->domain_age.size()) <= age) continue;
        ++n;
        const EvolutionRow& row = d->domain_age[static_cast<std::size_t>(age)];
        double denom =
            static_cast<double>(row.alive_whole) + static_cast<double>(row.died);
        if (denom == 0) continue;
        growth += (static_cast<double>(row.born) -
                   static_cast<double>(row.died)) / denom;
        birth += static_cast<double>(row.born) / denom;
        death += static_cast<double>(row.died) / denom;
        ++used;
      }
      if (used == 0) continue;
      emit(3, age, view.name, growth / static_cast<double>(used),
           birth / static_cast<double>(used),
           death / static_cast<double>(used), n);
    }
  }
  for (auto& s : result) sort_points(s);
  return result;
}

MetricSeries relative_domain_volume(std::span<const DomainStats> stats,
                                    const DomainCatalog& catalog) {
  constexpr std::int64_t kMaxAge = 12;  // first twelve domain years
  MetricSeries series{"relative_domain_volume", Frame::DomainAge, {}};
  for (const CategoryView& view : build_categories(stats, catalog)) {
    std::int64_t n_ages = std::min<std::int64_t>(max_domain_age_rows(view),
                                                 kMaxAge + 1);
    for (std::int64_t age = 0; age < n_ages; ++age) {
      double sum = 0.0;
      std::uint64_t n = 0, used = 0;
      for (const DomainStats* d : view.members) {
        if (static_cast<std::int64_t>(d->domain_age.size()) <= age) continue;
        ++n;
        std::uint64_t initial = d->domain_age[0].alive_end();
        if (initial == 0) continue;
        sum += static_cast<double>(
                   d->domain_age[static_cast<std::size_t>(age)].alive_end()) /
               static_cast<double>(initial);
        ++used;
      }
      if (used == 0) continue;
      series.points.push_back(
          {age, view.name, sum / static_cast<double>(used), n});
    }
  }
  sort_points(series);
  return series;
}

MetricSeries avg_url_size_evolution(std::span<const DomainStats> stats,
                                    const DomainCatalog& catalog,
                                    const MetricsOptions& options) {
  MetricSeries series{"avg_url_size", Frame::Evolution, {}};
  for (const CategoryView& view : build_categories(stats, catalog)) {
    for (int year = options.first_year; year <= options.final_year; ++year) {
      std::int64_t size = 0;
      std::uint64_t alive = 0;
      std::uint64_t n = 0;
      for (const DomainStats* d : view.members) {
        if (!in_evolution_cohort(*d, year)) continue;
        ++n;
        const EvolutionRow* row = row_for_year(d->evolution, year);
        if (row == nullptr) continue;
        size += row->size_end;
        alive += row->alive_end();
      }
      if (n == 0 || alive == 0) continue;
      series.points.push_back(
          {year, view.name,
           static_cast<double>(size) / static_cast<double>(alive), n});
    }
  }
  sort_points(series);
  return series;
}

MetricSeries avg_birth_size_evolution(std::span<const DomainStats> stats,
                                      const DomainCatalog& catalog,
                                      const MetricsOptions& options) {
  MetricSeries series{"avg_birth_size", Frame::Evolution, {}};
  for (const CategoryView& view : build_categories(stats, catalog)) {
    for (int year = options.first_year; year <= options.final_year; ++year) {
      std::int64_t size = 0;
      std::uint64_t newborn = 0;
      std::uint64_t n = 0;
      for (const DomainStats* d : view.members) {
        if (!in_evolution_cohort(*d, year)) continue;
        ++n;
        const EvolutionRow* row = row_for_year(d->evolution, year);
        if (row == nullptr) continue;
        size += row->born_size;
        newborn += row->born + row->flashed;
      }
      if (n == 0 || newborn == 0) continue;  // no births that year
      series.points.push_back(
          {year, view.name,
           static_cast<double>(size) / static_cast<double>(newborn), n});
    }
  }
  sort_points(series);
  return series;
}

std::vector<MetricSeries> cumulative_birth_death_size_by_age(
    std::span<const DomainStats> stats, const DomainCatalog& catalog) {
  std::vector<MetricSeries> result;
  result.push_back({"avg_birth_size_of_died", Frame::UrlAge, {}});
  result.push_back({"avg_death_size_of_died", Frame::UrlAge, {}});
  for (const CategoryView& view : build_categories(stats, catalog)) {
    std::int64_t n_ages = max_url_age_rows(view);
    for (std::int64_t age = 0; age < n_ages; ++age) {
      std::int64_t birth_sum = 0, death_sum = 0;
      std::uint64_t died = 0;
      std::uint64_t n = 0;
      for (const DomainStats* d : view.members) {
        if (static_cast<std::int64_t>(d->url_age.size()) <= age ||
            d->url_age[static_cast<std::size_t>(age)].count == 0) {
          continue;
        }
        ++n;
        for (std::size_t j = static_cast<std::size_t>(age);
             j < d->url_age.size(); ++j) {
          birth_sum += d->url_age[j].died_birth_size;
          death_sum += d->url_age[j].died_size;
          died += d->url_age[j].died;
        }
      }
      if (n == 0 || died == 0) continue;
      result[0].points.push_back(
          {age, view.name,
           static_cast<double>(birth_sum) / static_cast<double>(died), n});
      result[1].points.push_back(
          {age, view.name,
           static_cast<double>(death_sum) / static_cast<double>(died), n});
    }
  }
  for (auto& s : result) sort_points(s);
  return result;
}

std::vector<MetricSeries> domain_presence_per_year(
    std::span<const DomainStats> stats, const DomainCatalog& catalog,
    const MetricsOptions& options) {
  std::vector<MetricSeries> result;
  result.push_back({"presence", Frame::Evolution, {}});
  for (const CategoryView& view : build_categories(stats, catalog)) {
    if (view.catalog_size == 0) continue;
    for (int year = options.first_year; year <= options.final_year; ++year) {
      std::size_t slot = static_cast<std::size_t>(year - options.first_year);
      std::uint64_t present = 0;
      for (const DomainStats* d : view.members) {
        if (slot < d->captured_in_year.size() && d->captured_in_year[slot])
          ++present;
      }
      result[0].points.push_back(
          {year, view.name,
           static_cast<double>(present) /
               static_cast<double>(view.catalog_size),
           view.catalog_size});
    }
  }
  if (!options.external_series.empty()) {
    MetricSeries external{"registered_domains", Frame::Evolution, {}};
    for (const auto& [year, count] : options.external_series) {
      external.points.push_back(
          {year, "external", static_cast<double>(count), 0});
    }
    sort_points(external);
    result.push_back(std::move(external));
  }
  sort_points(result[0]);
  return result;
}

std::vector<MetricGroup> compute_all_metrics(std::span<const DomainStats> stats,
                                             const DomainCatalog& catalog,
                                             const MetricsOptions& options) {
  std::vector<MetricGroup> groups;
  groups.push_back(
      {"age_death_distribution", {age_death_distribution(stats, catalog)}});
  groups.push_back({"age_bucket_totals",
                    age_bucket_totals(stats, catalog, options)});
  groups.push_back({"age_bucket_fractions",
                    age_bucket_fractions(stats, catalog, options)});
  groups.push_back({"average_age_evolution",
                    {average_age_evolution(stats, catalog, options)}});
  groups.push_back({"long_living_average_age",
                    long_living_average_age(stats, catalog, options)});
  groups.push_back({"total_volume_evolution",
                    total_volume_evolution(stats, catalog, options)});
  groups.push_back(
      {"avg_domain_volume", {avg_domain_volume(stats, catalog, options)}});
  groups.push_back({"growth_rates", growth_rates(stats, catalog, options)});
  groups.push_back(
      {"relative_domain_volume", {relative_domain_volume(stats, catalog)}});
  groups.push_back({"avg_url_size_evolution",
                    {avg_url_size_evolution(stats, catalog, options)}});
  groups.push_back({"avg_birth_size_evolution",
                    {avg_birth_size_evolution(stats, catalog, options)}});
  groups.push_back({"cumulative_birth_death_size_by_age",
                    cumulative_birth_death_size_by_age(stats, catalog)});
  groups.push_back({"domain_presence_per_year",
                    domain_presence_per_year(stats, catalog, options)});
  return groups;
}

std::string render_metric_csv(std::span<const MetricSeries> series) {
  std::string out = "frame,metric,category,i,value,n_domains\n";
  char buf[64];
  for (const MetricSeries& s : series) {
    for (const MetricPoint& p : s.points) {
      out += frame_name(s.frame);
      out += ',';
      out += s.metric_id;
      out += ',';
      out += p.category;
      out += ',';
      out += std::to_string(p.i);
      out += ',';
      std::snprintf(buf, sizeof(buf), "%.9g", p.value);
      out += buf;
      out += ',';
      out += std::to_string(p.n_domains);
      out += '\n';
    }
  }
  return out;
}

void write_metric_csv(const std::filesystem::path& file,
                      std::span<const MetricSeries> series) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << render_metric_csv(series);
}

}  // namespace cdxstats
