#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cdxstats/corpus.hpp"

namespace cdxstats {

// Synthetic CDX corpora with known analytic properties, used by the
// acceptance suite and available through `cdxstats generate`.
//
//   pure_growth         no deaths; yearly births grow linearly, every URL
//                       is recrawled once per calendar year through the
//                       final year
//   geometric_lifespan  every URL dies; the age-at-death hazard is p at age
//                       zero and min(1, 2 p^(i+1)) at age i >= 1, capped at
//                       age 8, so the expected died/count ratio at age i is
//                       exactly that hazard
//   paper_trend         volume of every domain tracks round(a b^x + c) with
//                       a=22.82 b=1.38 c=300.18, and URLs born in year x
//                       are born with exactly 866 x + 1320 bytes
enum class GenModel { PureGrowth, GeometricLifespan, PaperTrend };

std::optional<GenModel> gen_model_from_name(std::string_view name);

struct GenConfig {
  int first_year = 1996;
  int final_year = 2013;
  std::uint64_t seed = 42;
  unsigned domains = 20;
  unsigned urls = 10000;  // total URL target (paper_trend derives its own)
  double death_p = 0.5;   // geometric_lifespan hazard parameter
  std::string tld = ".de";
  unsigned categories = 4;
};

struct GenStats {
  std::uint64_t urls = 0;
  std::uint64_t lines = 0;
};

// Emits CDX lines (no trailing newline) in a deterministic order given the
// seed. Lines are grouped per URL, round-robin across domains.
GenStats generate_corpus(GenModel model, const GenConfig& config,
                         const std::function<void(std::string_view)>& sink);

// The matching category -> domain catalog.
std::vector<CatalogEntry> generator_catalog(const GenConfig& config);

// Hazard of dying at age i under geometric_lifespan(p).
double geometric_lifespan_hazard(double p, int age);

}  // namespace cdxstats
