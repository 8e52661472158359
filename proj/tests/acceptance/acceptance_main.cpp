// Acceptance suite: executes every primary acceptance criterion and prints
// one PASS/FAIL line per criterion. Exits nonzero when any criterion fails.
//
//   usage: acceptance <path-to-cdxstats-binary> <scratch-dir>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cdxstats/fitting.hpp"
#include "cdxstats/generator.hpp"
#include "cdxstats/lifespan.hpp"
#include "cdxstats/pipeline.hpp"
#include "compare.hpp"
#include "corpus_gen.hpp"
#include "subprocess.hpp"

namespace fs = std::filesystem;
using namespace cdxstats;

namespace {

std::string g_binary;
fs::path g_scratch;
int g_failures = 0;

void report(const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] %-28s %s\n", pass ? "PASS" : "FAIL", name,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double elapsed_s(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// ---- criterion 1 + 3: oracle equivalence and the identity suite --------

void criterion_oracle_and_identities() {
  auto start = std::chrono::steady_clock::now();
  std::size_t table_diffs = 0, metric_diffs = 0, identity_diffs = 0;
  std::string first_diff;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    auto corpus = testsup::random_corpus(seed, 10000);
    auto impl = testsup::run_impl_pipeline(corpus);
    auto expected = testsup::run_oracle(corpus);
    auto td = testsup::diff_tables(impl, expected);
    auto md = testsup::diff_metrics(impl, expected, 1e-9);
    auto id = testsup::check_identities(impl);
    table_diffs += td.size();
    metric_diffs += md.size();
    identity_diffs += id.size();
    if (first_diff.empty()) {
      if (!td.empty()) first_diff = "seed " + std::to_string(seed) + ": " + td[0];
      else if (!md.empty()) first_diff = "seed " + std::to_string(seed) + ": " + md[0];
      else if (!id.empty()) first_diff = "seed " + std::to_string(seed) + ": " + id[0];
    }
  }
  double secs = elapsed_s(start);
  {
    std::ostringstream os;
    os << "50 corpora, " << table_diffs << " table diffs, " << metric_diffs
       << " metric diffs, " << secs << "s";
    if (!first_diff.empty()) os << " | " << first_diff;
    report("oracle-equivalence",
           table_diffs == 0 && metric_diffs == 0 && secs < 60.0, os.str());
  }
  report("identity-suite", identity_diffs == 0,
         std::to_string(identity_diffs) + " identity violations");
}

// ---- criterion 2: fixture regression ------------------------------------

void criterion_fixture() {
  auto corpus = testsup::fixture_corpus();
  auto run = testsup::run_impl_pipeline(corpus);
  std::vector<std::string> bad;

  if (run.stats.size() != 1) bad.push_back("domain count");
  const DomainStats& d = run.stats.at(0);
  const EvolutionRow* y2000 = row_for_year(d.evolution, 2000);
  if (y2000 == nullptr || y2000->born != 1 || y2000->flashed != 1 ||
      y2000->died != 0 || y2000->born_size != 300 ||
      y2000->alive_end() != 1 ||
      y2000->ages != std::vector<std::int32_t>{11})
    bad.push_back("evolution 2000 row");
  const EvolutionRow* y2001 = row_for_year(d.evolution, 2001);
  if (y2001 == nullptr || y2001->alive_whole != 1 || y2001->born != 1 ||
      y2001->alive_end() != 2 ||
      y2001->ages != std::vector<std::int32_t>{11, 23})
    bad.push_back("evolution 2001 row");
  const EvolutionRow* y2002 = row_for_year(d.evolution, 2002);
  if (y2002 == nullptr || y2002->died != 1 || y2002->alive_end() != 1 ||
      y2002->ages != std::vector<std::int32_t>{35})
    bad.push_back("evolution 2002 row");

  if (d.domain_age.size() != 3 || d.domain_age[0].born != 2 ||
      d.domain_age[0].flashed != 1 || d.domain_age[0].alive_end() != 2 ||
      d.domain_age[2].died != 1 || d.domain_age[2].alive_end() != 1)
    bad.push_back("domain-age rows");

  if (d.url_age.size() != 2 || d.url_age[0].count != 2 ||
      d.url_age[0].died != 1 || d.url_age[0].died_birth_size != 200 ||
      d.url_age[0].died_size != 220 || d.url_age[1].count != 1 ||
      d.url_age[1].died != 1 || d.url_age[1].died_birth_size != 50 ||
      d.url_age[1].died_size != 80)
    bad.push_back("url-age rows");

  auto value = [&run](const char* group, const char* metric, Frame frame,
                      std::int64_t i) -> double {
    for (const MetricGroup& g : run.metrics) {
      if (g.name != group) continue;
      for (const MetricSeries& s : g.series) {
        if (s.metric_id != metric || s.frame != frame) continue;
        for (const MetricPoint& p : s.points)
          if (p.category == "overall" && p.i == i) return p.value;
      }
    }
    return NAN;
  };
  auto close = [](double a, double b) { return std::fabs(a - b) < 1e-9; };

  if (!close(value("age_death_distribution", "age_death_distribution",
                   Frame::UrlAge, 0), 0.5) ||
      !close(value("age_death_distribution", "age_death_distribution",
                   Frame::UrlAge, 1), 1.0))
    bad.push_back("age-death values");
  if (!close(value("growth_rates", "growth_rate", Frame::Evolution, 2002),
             -0.5))
    bad.push_back("growth rate 2002");
  if (!close(value("average_age_evolution", "average_age_months",
                   Frame::Evolution, 2001), 17.0))
    bad.push_back("average age 2001");
  if (!close(value("avg_birth_size_evolution", "avg_birth_size",
                   Frame::Evolution, 2000), 150.0))
    bad.push_back("avg birth size 2000");
  if (!close(value("relative_domain_volume", "relative_domain_volume",
                   Frame::DomainAge, 2), 0.5))
    bad.push_back("relative volume age 2");
  if (!close(value("cumulative_birth_death_size_by_age",
                   "avg_birth_size_of_died", Frame::UrlAge, 0), 125.0) ||
      !close(value("cumulative_birth_death_size_by_age",
                   "avg_death_size_of_died", Frame::UrlAge, 0), 150.0))
    bad.push_back("cumulative sizes age 0");
  double alive[4] = {
      value("total_volume_evolution", "alive_end", Frame::Evolution, 2000),
      value("total_volume_evolution", "alive_end", Frame::Evolution, 2001),
      value("total_volume_evolution", "alive_end", Frame::Evolution, 2002),
      value("total_volume_evolution", "alive_end", Frame::Evolution, 2003)};
  if (alive[0] != 1 || alive[1] != 2 || alive[2] != 1 || alive[3] != 1)
    bad.push_back("volume series");

  std::string detail = bad.empty() ? "all stated values reproduced"
                                   : "mismatch: " + bad.front();
  report("fixture-regression", bad.empty(), detail);
}

// ---- criterion 4: fit recovery -------------------------------------------

void criterion_fit_recovery() {
  std::vector<double> x;
  for (int i = 0; i <= 17; ++i) x.push_back(i);
  std::vector<std::string> bad;

  std::vector<double> y_lin;
  for (double xi : x) y_lin.push_back(0.74 * xi + 4.89);
  FitResult lin = fit(x, y_lin, FitModel::Linear);
  if (std::fabs(lin.params[0] - 0.74) / 0.74 > 1e-4 ||
      std::fabs(lin.params[1] - 4.89) / 4.89 > 1e-4)
    bad.push_back("linear recovery");

  std::vector<double> y_exp;
  for (double xi : x) y_exp.push_back(22.82 * std::pow(1.38, xi) + 300.18);
  FitResult exp_fit = fit(x, y_exp, FitModel::Exponential);
  if (std::fabs(exp_fit.params[0] - 22.82) / 22.82 > 1e-4 ||
      std::fabs(exp_fit.params[1] - 1.38) / 1.38 > 1e-4 ||
      std::fabs(exp_fit.params[2] - 300.18) / 300.18 > 1e-4)
    bad.push_back("exponential recovery");

  double p[] = {22.82, 1.38, 300.18};
  for (double xi : {0.0, 3.5, 9.0, 17.0}) {
    double jac[3];
    model_jacobian(FitModel::Exponential, std::span<const double>(p, 3), xi,
                   jac);
    for (int i = 0; i < 3; ++i) {
      double h = 1e-5 * std::max(1.0, std::fabs(p[i]));
      double hi_p[3] = {p[0], p[1], p[2]};
      double lo_p[3] = {p[0], p[1], p[2]};
      hi_p[i] += h;
      lo_p[i] -= h;
      double fd = (eval_model(FitModel::Exponential,
                              std::span<const double>(hi_p, 3), xi) -
                   eval_model(FitModel::Exponential,
                              std::span<const double>(lo_p, 3), xi)) /
                  (2 * h);
      if (std::fabs(jac[i] - fd) / std::max(std::fabs(fd), 1e-9) > 1e-6)
        bad.push_back("jacobian");
    }
  }
  report("fit-recovery", bad.empty(),
         bad.empty() ? "linear, exponential and jacobian within tolerance"
                     : bad.front());
}

// ---- criterion 5: paper prediction arithmetic ----------------------------

void criterion_paper_predictions() {
  FitResult volume;
  volume.model = FitModel::Exponential;
  volume.params = {22.82, 1.38, 300.18};
  FitResult aging;
  aging.model = FitModel::Linear;
  aging.params = {0.74, 4.89, 0};
  FitResult birth;
  birth.model = FitModel::Linear;
  birth.params = {866, 1320, 0};

  struct Check {
    const char* what;
    double got;
    double want;
    double tol;
  } checks[] = {
      {"volume x24/x18", volume.predict(24) / volume.predict(18), 6.7, 0.1},
      {"volume x20/x18", volume.predict(20) / volume.predict(18), 1.9, 0.05},
      {"age at x24", aging.predict(24), 23.0, 0.5},
      {"age at x42", aging.predict(42), 36.0, 0.5},
      {"birth size x42/x20", birth.predict(42) / birth.predict(20), 2.02,
       0.05},
  };
  std::string detail;
  bool pass = true;
  for (const Check& c : checks) {
    if (std::fabs(c.got - c.want) > c.tol) {
      pass = false;
      std::ostringstream os;
      os << c.what << " = " << c.got << " wants " << c.want << "±" << c.tol;
      detail = os.str();
      break;
    }
  }
  if (pass) {
    std::ostringstream os;
    os << "6.7x / 1.9x / 23mo / 36mo / 2.02x all hold";
    detail = os.str();
  }
  report("paper-predictions", pass, detail);
}

// ---- criterion 6: generator statistics -----------------------------------

void criterion_generator_stats() {
  GenConfig config;
  config.urls = 10000;
  config.domains = 10;
  config.death_p = 0.5;
  config.seed = 42;

  testsup::TestCorpus corpus;
  corpus.first_year = config.first_year;
  corpus.final_year = config.final_year;
  corpus.catalog = make_catalog(generator_catalog(config));
  bool parse_ok = true;
  generate_corpus(GenModel::GeometricLifespan, config,
                  [&corpus, &parse_ok](std::string_view line) {
                    CaptureRecord rec;
                    if (parse_line(line, rec)) parse_ok = false;
                    else corpus.records.push_back(std::move(rec));
                  });
  auto run = testsup::run_impl_pipeline(corpus);

  double values[4] = {NAN, NAN, NAN, NAN};
  for (const MetricGroup& g : run.metrics) {
    if (g.name != "age_death_distribution") continue;
    for (const MetricPoint& p : g.series[0].points)
      if (p.category == "overall" && p.i <= 3)
        values[p.i] = p.value;
  }
  // expected: p at age 0, then 2 p^(i+1)
  bool pass = parse_ok && std::fabs(values[0] - 0.5) <= 0.02;
  for (int i = 1; i <= 3; ++i) {
    double want = 2.0 * std::pow(0.5, i + 1);
    if (!(std::fabs(values[i] - want) <= 0.03)) pass = false;
  }
  std::ostringstream os;
  os << "age death = " << values[0] << ", " << values[1] << ", " << values[2]
     << ", " << values[3] << " (wants 0.5, 0.5, 0.25, 0.125)";
  report("generator-statistics", pass, os.str());
}

// ---- criterion 7: performance --------------------------------------------

void criterion_performance() {
  fs::path dir = g_scratch / "perf";
  fs::remove_all(dir);
  fs::create_directories(dir);
  constexpr std::uint64_t kMemCap = 2ull << 30;

  auto gen = testsup::run_process(
      {g_binary, "generate", "--model", "pure_growth", "--urls", "1520000",
       "--domains", "50", "--out", (dir / "corpus").string()},
      kMemCap);
  if (gen.exit_code != 0) {
    report("performance", false, "generate failed: " + gen.output);
    return;
  }

  // single-thread parse throughput over the first two million lines
  double lines_per_s = 0;
  {
    ManifestReader reader(dir / "corpus" / "corpus.cdx");
    CaptureRecord rec;
    auto start = std::chrono::steady_clock::now();
    std::uint64_t n = 0;
    while (n < 2000000 && reader.next(rec)) ++n;
    lines_per_s = double(n) / elapsed_s(start);
  }

  auto start = std::chrono::steady_clock::now();
  auto build = testsup::run_process(
      {g_binary, "build-index", "--cdx", (dir / "corpus").string(),
       "--catalog", (dir / "corpus" / "catalog.tsv").string(), "--index",
       (dir / "idx").string(), "--threads", "4"},
      kMemCap);
  double build_s = elapsed_s(start);
  if (build.exit_code != 0) {
    report("performance", false, "build-index failed: " + build.output);
    return;
  }
  std::uint64_t lines_read = 0;
  {
    auto pos = build.output.find("parse: ");
    if (pos != std::string::npos)
      lines_read = std::strtoull(build.output.c_str() + pos + 7, nullptr, 10);
  }

  auto mid = std::chrono::steady_clock::now();
  auto analyze = testsup::run_process(
      {g_binary, "analyze", "--index", (dir / "idx").string(), "--catalog",
       (dir / "corpus" / "catalog.tsv").string(), "--out",
       (dir / "out").string(), "--threads", "4"},
      kMemCap);
  double analyze_s = elapsed_s(mid);
  if (analyze.exit_code != 0) {
    report("performance", false, "analyze failed: " + analyze.output);
    return;
  }

  double total = build_s + analyze_s;
  bool pass = lines_read >= 10000000 && total < 180.0 &&
              lines_per_s >= 200000.0;
  std::ostringstream os;
  os << lines_read << " lines; index " << int(build_s) << "s + analyze "
     << int(analyze_s) << "s = " << int(total) << "s (cap 180); parse "
     << std::size_t(lines_per_s) << " lines/s/core (floor 200k); 2 GiB "
     << "address-space cap";
  report("performance", pass, os.str());
  fs::remove_all(dir);
}

// ---- criterion 8: determinism --------------------------------------------

void criterion_determinism() {
  bool pass = true;
  std::string detail = "1 vs 8 threads byte-identical on 3 corpora";
  for (std::uint64_t seed : {11ull, 22ull, 33ull}) {
    fs::path dir = g_scratch / ("det-" + std::to_string(seed));
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto corpus = testsup::random_corpus(seed, 8000);
    {
      std::ofstream out(dir / "corpus.cdx", std::ios::binary);
      out << testsup::to_cdx_text(corpus.records);
      std::ofstream cat(dir / "catalog.tsv", std::ios::binary);
      for (const auto& e : corpus.catalog.entries)
        cat << e.category << '\t' << e.domain << '\n';
    }
    std::string fy = std::to_string(corpus.final_year);
    for (const char* run : {"t1", "t8"}) {
      const char* threads = run[1] == '1' ? "1" : "8";
      auto b = testsup::run_process(
          {g_binary, "build-index", "--cdx", (dir / "corpus.cdx").string(),
           "--catalog", (dir / "catalog.tsv").string(), "--index",
           (dir / run / "idx").string(), "--final-year", fy, "--threads",
           threads});
      auto a = testsup::run_process(
          {g_binary, "analyze", "--index", (dir / run / "idx").string(),
           "--catalog", (dir / "catalog.tsv").string(), "--out",
           (dir / run / "out").string(), "--final-year", fy, "--threads",
           threads});
      if (b.exit_code != 0 || a.exit_code != 0) {
        pass = false;
        detail = "pipeline failed on seed " + std::to_string(seed);
      }
    }
    if (!pass) break;
    for (const char* sub : {"idx", "out"}) {
      for (const auto& entry : fs::directory_iterator(dir / "t1" / sub)) {
        auto name = entry.path().filename();
        if (slurp(entry.path()) != slurp(dir / "t8" / sub / name)) {
          pass = false;
          detail = "differs: seed " + std::to_string(seed) + " " +
                   (fs::path(sub) / name).string();
        }
      }
    }
    fs::remove_all(dir);
    if (!pass) break;
  }
  report("determinism", pass, detail);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: acceptance <cdxstats-binary> <scratch-dir>\n");
    return 2;
  }
  g_binary = argv[1];
  g_scratch = argv[2];
  fs::create_directories(g_scratch);

  criterion_oracle_and_identities();
  criterion_fixture();
  criterion_fit_recovery();
  criterion_paper_predictions();
  criterion_generator_stats();
  criterion_performance();
  criterion_determinism();

  std::printf("%s: %d criterion(s) failed\n",
              g_failures == 0 ? "ACCEPTANCE OK" : "ACCEPTANCE FAILED",
              g_failures);
  return g_failures == 0 ? 0 : 1;
}
