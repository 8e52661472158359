#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cdxstats/corpus.hpp"
#include "cdxstats/stats.hpp"

namespace cdxstats {

enum class Frame { Evolution, DomainAge, UrlAge };
std::string_view frame_name(Frame f);

// Everything the aggregation formulas need about one domain. Sorted spans
// of these are the single input to the metric evaluators, which keeps the
// fold order (and with it the emitted doubles) independent of how the
// tables were produced.
struct DomainStats {
  std::string domain;
  Instant birth = 0;
  std::vector<EvolutionRow> evolution;
  std::vector<EvolutionRow> domain_age;
  std::vector<UrlAgeRow> url_age;

  // analyze-time bookkeeping
  std::uint64_t urls_prefilter = 0;
  std::uint64_t urls_kept = 0;
  std::uint64_t subdomains = 0;
  std::vector<std::uint8_t> captured_in_year;  // first_year..final_year
};

struct MetricPoint {
  std::int64_t i = 0;
  std::string category;
  double value = 0.0;
  std::uint64_t n_domains = 0;
};

struct MetricSeries {
  std::string metric_id;
  Frame frame = Frame::Evolution;
  std::vector<MetricPoint> points;  // sorted by (category, i)
};

struct MetricsOptions {
  int first_year = 1996;
  int final_year = 2013;
  // external registered-domain counts, passed through into the presence
  // report: (year, count)
  std::vector<std::pair<int, std::int64_t>> external_series;
};

// The six age buckets: bucket a covers months [12a, 12(a+1)), the last one
// absorbs everything of five years and beyond.
inline constexpr int kAgeBuckets = 6;
std::pair<std::int32_t, std::int32_t> bucket_month_range(int bucket);

// One group of series per aggregation formula, in a stable order. Each
// group maps to one CSV file named <name>.csv.
struct MetricGroup {
  std::string name;
  std::vector<MetricSeries> series;
};

// `stats` must be sorted by domain name and hold one entry per domain that
// survived filtering with at least one kept URL.
std::vector<MetricGroup> compute_all_metrics(std::span<const DomainStats> stats,
                                             const DomainCatalog& catalog,
                                             const MetricsOptions& options);

// Individual evaluators (category-aware); used directly by tests.
MetricSeries age_death_distribution(std::span<const DomainStats> stats,
                                    const DomainCatalog& catalog);
std::vector<MetricSeries> age_bucket_totals(std::span<const DomainStats> stats,
                                            const DomainCatalog& catalog,
                                            const MetricsOptions& options);
std::vector<MetricSeries> age_bucket_fractions(
    std::span<const DomainStats> stats, const DomainCatalog& catalog,
    const MetricsOptions& options);
MetricSeries average_age_evolution(std::span<const DomainStats> stats,
                                   const DomainCatalog& catalog,
                                   const MetricsOptions& options);
std::vector<MetricSeries> long_living_average_age(
    std::span<const DomainStats> stats, const DomainCatalog& catalog,
    const MetricsOptions& options);
std::vector<MetricSeries> total_volume_evolution(
    std::span<const DomainStats> stats, const DomainCatalog& catalog,
    const MetricsOptions& options);
MetricSeries avg_domain_volume(std::span<const DomainStats> stats,
                               const DomainCatalog& catalog,
                               const MetricsOptions& options);
std::vector<MetricSeries> growth_rates(std::span<const DomainStats> stats,
                                       const DomainCatalog& catalog,
                                       const MetricsOptions& options);
MetricSeries relative_domain_volume(std::span<const DomainStats> stats,
                                    const DomainCatalog& catalog);
MetricSeries avg_url_size_evolution(std::span<const DomainStats> stats,
                                    const DomainCatalog& catalog,
                                    const MetricsOptions& options);
MetricSeries avg_birth_size_evolution(std::span<const DomainStats> stats,
                                      const DomainCatalog& catalog,
                                      const MetricsOptions& options);
std::vector<MetricSeries> cumulative_birth_death_size_by_age(
    std::span<const DomainStats> stats, const DomainCatalog& catalog);
std::vector<MetricSeries> domain_presence_per_year(
    std::span<const DomainStats> stats, const DomainCatalog& catalog,
    const MetricsOptions& options);

// CSV: header `frame,metric,category,i,value,n_domains`, UTF-8, LF,
// 9 significant digits.
void write_metric_csv(const std::filesystem::path& file,
                      std::span<const MetricSeries> series);
std::string render_metric_csv(std::span<const MetricSeries> series);

}  // namespace cdxstats
