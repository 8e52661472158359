#include "cdxstats/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "cdxstats/calendar.hpp"

namespace cdxstats {

namespace {

constexpr int kMaxLifespanYears = 8;  // geometric_lifespan cap

std::string domain_name(unsigned d, const GenConfig& config) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "d%04u", d);
  return std::string(buf) + config.tld;
}

// `de` from `.de`
std::string_view tld_label(const GenConfig& config) {
  std::string_view tld = config.tld;
  if (!tld.empty() && tld.front() == '.') tld.remove_prefix(1);
  return tld;
}

struct LineBuilder {
  const GenConfig& config;
  const std::function<void(std::string_view)>& sink;
  std::string line;
  std::uint64_t lines = 0;
  std::uint64_t offset = 0;

  void emit(std::string_view domain, std::string_view sub, unsigned url_id,
            Instant ts, int status, std::int64_t size) {
    std::string_view label = domain.substr(0, domain.find('.'));
    line.clear();
    line += tld_label(config);
    line += ',';
    line += label;
    if (!sub.empty()) {
      line += ',';
      line += sub;
    }
    line += ")/u";
    line += std::to_string(url_id);
    line += ' ';
    line += format_timestamp14(ts);
    line += " http://";
    if (!sub.empty()) {
      line += sub;
      line += '.';
    }
    line += domain;
    line += "/u";
    line += std::to_string(url_id);
    line += " text/html ";
    line += std::to_string(status);
    line += ' ';
    // cheap deterministic checksum token
    std::uint64_t h = 1469598103934665603ull;
    for (char ch : line) h = (h ^ static_cast<unsigned char>(ch)) * 1099511628211ull;
    char sum[12];
    std::snprintf(sum, sizeof(sum), "%08llX",
                  static_cast<unsigned long long>(h & 0xffffffffull));
    line += sum;
    line += " - - ";
    if (size >= 0) line += std::to_string(size);
    else line += '-';
    line += ' ';
    line += std::to_string(offset);
    line += " synth-";
    line += label;
    line += ".warc.gz";
    if (size > 0) offset += static_cast<std::uint64_t>(size);
    ++lines;
    sink(line);
  }
};

struct UrlPlan {
  unsigned domain = 0;
  unsigned url_id = 0;
  std::string sub;  // subdomain label or empty
  std::vector<Capture> captures;
};

void emit_plans(std::vector<UrlPlan>& plans, LineBuilder& builder,
                const std::vector<std::string>& domains, GenStats& stats) {
  // round-robin across domains so the input is not pre-sorted
  std::stable_sort(plans.begin(), plans.end(),
                   [](const UrlPlan& a, const UrlPlan& b) {
                     if (a.url_id != b.url_id) return a.url_id < b.url_id;
                     return a.domain < b.domain;
                   });
  for (const UrlPlan& plan : plans) {
    for (const Capture& c : plan.captures) {
      builder.emit(domains[plan.domain], plan.sub, plan.url_id, c.ts, c.status,
                   c.size);
    }
    ++stats.urls;
  }
  stats.lines = builder.lines;
}

GenStats generate_pure_growth(const GenConfig& config, LineBuilder& builder) {
  GenStats stats;
  std::vector<std::string> domains;
  for (unsigned d = 0; d < config.domains; ++d)
    domains.push_back(domain_name(d, config));

  const int years = config.final_year - config.first_year + 1;
  // yearly births weighted (x + 1): monotone growth
  std::uint64_t weight_sum = 0;
  for (int x = 0; x < years; ++x) weight_sum += static_cast<std::uint64_t>(x + 1);
  const std::uint64_t per_domain = std::max<std::uint64_t>(
      1, config.urls / std::max(1u, config.domains));

  std::vector<UrlPlan> plans;
  for (unsigned d = 0; d < config.domains; ++d) {
    unsigned url_id = 0;
    for (int x = 0; x < years; ++x) {
      std::uint64_t births = std::max<std::uint64_t>(
          1, per_domain * static_cast<std::uint64_t>(x + 1) / weight_sum);
      for (std::uint64_t j = 0; j < births; ++j) {
        UrlPlan plan;
        plan.domain = d;
        plan.url_id = url_id++;
        if (plan.url_id % 5 == 0) plan.sub = "www";
        int birth_year = config.first_year + x;
        Civil birth_civil{birth_year, 1 + static_cast<int>(j % 10),
                          5 + static_cast<int>(j % 20), 0, 0, 0};
        Instant birth = to_instant(birth_civil);
        std::int64_t size =
            1000 + 16 * static_cast<std::int64_t>(x) +
            static_cast<std::int64_t>(j % 64);
        plan.captures.push_back({birth, 200, size});
        if (birth_year == config.final_year) {
          plan.captures.push_back({add_months(birth, 1), 200, size});
        } else {
          for (int y = birth_year + 1; y <= config.final_year; ++y) {
            Instant recrawl = to_instant({y, birth_civil.month,
                                          birth_civil.day, 12, 0, 0});
            size += 8;
            plan.captures.push_back({recrawl, 200, size});
          }
        }
        plans.push_back(std::move(plan));
      }
    }
  }
  emit_plans(plans, builder, domains, stats);
  return stats;
}

GenStats generate_geometric(const GenConfig& config, LineBuilder& builder) {
  GenStats stats;
  std::vector<std::string> domains;
  for (unsigned d = 0; d < config.domains; ++d)
    domains.push_back(domain_name(d, config));

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const std::uint64_t per_domain = std::max<std::uint64_t>(
      1, config.urls / std::max(1u, config.domains));

  std::vector<UrlPlan> plans;
  for (unsigned d = 0; d < config.domains; ++d) {
    for (std::uint64_t j = 0; j < per_domain; ++j) {
      UrlPlan plan;
      plan.domain = d;
      plan.url_id = static_cast<unsigned>(j);
      if (j % 7 == 0) plan.sub = "www";

      int birth_year = config.first_year + static_cast<int>(j % 3);
      Civil birth_civil{birth_year, 1 + static_cast<int>((j * 7) % 12),
                        10 + static_cast<int>(j % 15), 6, 0, 0};
      Instant birth = to_instant(birth_civil);

      int age = 0;
      while (age < kMaxLifespanYears &&
             uniform(rng) >= geometric_lifespan_hazard(config.death_p, age))
        ++age;

      std::int64_t size = 500 + 100 * static_cast<std::int64_t>(j % 3) +
                          static_cast<std::int64_t>(j % 50);
      plan.captures.push_back({birth, 200, size});
      plan.captures.push_back({add_months(birth, 3), 200, size + 20});
      for (int k = 1; k <= age; ++k) {
        plan.captures.push_back(
            {add_months(birth, 12 * k + 1), 200, size + 20 + 4 * k});
      }
      // death: first failure at 12*age + 6 months, lifespan lands in age
      // bucket `age` exactly
      plan.captures.push_back({add_months(birth, 12 * age + 6), 404, -1});
      plans.push_back(std::move(plan));
    }
  }
  emit_plans(plans, builder, domains, stats);
  return stats;
}

GenStats generate_paper_trend(const GenConfig& config, LineBuilder& builder) {
  GenStats stats;
  std::vector<std::string> domains;
  for (unsigned d = 0; d < config.domains; ++d)
    domains.push_back(domain_name(d, config));

  constexpr double kA = 22.82, kB = 1.38, kC = 300.18;
  const int years = config.final_year - config.first_year + 1;

  std::vector<UrlPlan> plans;
  for (unsigned d = 0; d < config.domains; ++d) {
    unsigned url_id = 0;
    std::uint64_t alive = 0;
    for (int x = 0; x < years; ++x) {
      auto target = static_cast<std::uint64_t>(
          std::llround(kA * std::pow(kB, x) + kC));
      std::uint64_t births = target > alive ? target - alive : 0;
      for (std::uint64_t j = 0; j < births; ++j) {
        UrlPlan plan;
        plan.domain = d;
        plan.url_id = url_id++;
        int birth_year = config.first_year + x;
        Civil birth_civil{birth_year, 1 + static_cast<int>(j % 10),
                          1 + static_cast<int>(j % 25), 0, 0, 0};
        Instant birth = to_instant(birth_civil);
        std::int64_t birth_size = 866 * x + 1320;
        plan.captures.push_back({birth, 200, birth_size});
        plan.captures.push_back({add_months(birth, 2), 200, birth_size + 4});
        if (birth_year != config.final_year) {
          Instant final_crawl = to_instant(
              {config.final_year, 1 + static_cast<int>(j % 10),
               1 + static_cast<int>(j % 25), 12, 0, 0});
          plan.captures.push_back({final_crawl, 200, birth_size + 16});
        }
        plans.push_back(std::move(plan));
      }
      alive = target;
    }
  }
  emit_plans(plans, builder, domains, stats);
  return stats;
}

}  // namespace

std::optional<GenModel> gen_model_from_name(std::string_view name) {
  if (name == "pure_growth") return GenModel::PureGrowth;
  if (name == "geometric_lifespan") return GenModel::GeometricLifespan;
  if (name == "paper_trend") return GenModel::PaperTrend;
  return std::nullopt;
}

double geometric_lifespan_hazard(double p, int age) {
  if (age >= kMaxLifespanYears) return 1.0;
  if (age == 0) return p;
  return std::min(1.0, 2.0 * std::pow(p, age + 1));
}

GenStats generate_corpus(GenModel model, const GenConfig& config,
                         const std::function<void(std::string_view)>& sink) {
  LineBuilder builder{config, sink, {}, 0, 0};
  switch (model) {
    case GenModel::PureGrowth: return generate_pure_growth(config, builder);
    case GenModel::GeometricLifespan:
      return generate_geometric(config, builder);
    case GenModel::PaperTrend: return generate_paper_trend(config, builder);
  }
  return {};
}

std::vector<CatalogEntry> generator_catalog(const GenConfig& config) {
  std::vector<CatalogEntry> entries;
  unsigned n_cats = std::max(1u, config.categories);
  for (unsigned d = 0; d < config.domains; ++d) {
    entries.push_back({"cat" + std::to_string(d % n_cats),
                       domain_name(d, config)});
  }
  return entries;
}

}  // namespace cdxstats
