// cdxstats: CDX web-archive longitudinal statistics toolkit.
//
//   cdxstats build-index  parse CDX manifests into the domain-keyed index
//   cdxstats analyze      compute property tables, metrics, fits, reports
//   cdxstats generate     emit a synthetic CDX corpus with known properties
//   cdxstats fit          fit a trend model to a metric CSV column

#include <zlib.h>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cdxstats/cdx.hpp"
#include "cdxstats/generator.hpp"
#include "cdxstats/kernels.hpp"
#include "cdxstats/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitStrictParse = 2;
constexpr int kExitIo = 3;

void add_common_flags(CLI::App* cmd, cdxstats::RunConfig& config) {
  cmd->add_option("--first-year", config.first_year, "First calendar year")
      ->envname("CDXSTATS_FIRST_YEAR");
  cmd->add_option("--final-year", config.final_year,
                  "Final calendar year of the dataset")
      ->envname("CDXSTATS_FINAL_YEAR");
  cmd->add_option("--tld", config.tld_suffix,
                  "Registered-domain TLD suffix, e.g. .de")
      ->envname("CDXSTATS_TLD");
  cmd->add_option("--threads", config.threads, "Worker threads")
      ->check(CLI::Range(1u, 256u))
      ->envname("CDXSTATS_THREADS");
  cmd->add_option("--seed", config.seed, "Random seed")
      ->envname("CDXSTATS_SEED");
}

void print_parse_report(const cdxstats::ParseReport& report) {
  std::printf("parse: %llu lines, %llu records, %llu skipped, %llu header\n",
              static_cast<unsigned long long>(report.lines_read),
              static_cast<unsigned long long>(report.records_ok),
              static_cast<unsigned long long>(report.lines_skipped),
              static_cast<unsigned long long>(report.header_lines));
  std::size_t shown = std::min<std::size_t>(report.first_errors.size(), 5);
  for (std::size_t i = 0; i < shown; ++i) {
    std::printf("  line %llu: %s\n",
                static_cast<unsigned long long>(report.first_errors[i].first),
                std::string(skip_reason_name(report.first_errors[i].second))
                    .c_str());
  }
  if (report.first_errors.size() > shown)
    std::printf("  ... %zu more\n", report.first_errors.size() - shown);
}

void print_filter_outcome(const cdxstats::FilterOutcome& o) {
  std::printf(
      "filters (preview at final year): kept %llu, extension %llu, "
      "never-successful %llu, not-crawled-final-year %llu, "
      "single-success %llu\n",
      static_cast<unsigned long long>(o.kept_urls),
      static_cast<unsigned long long>(o.dropped_extension),
      static_cast<unsigned long long>(o.dropped_never_successful),
      static_cast<unsigned long long>(o.dropped_not_crawled_final_year),
      static_cast<unsigned long long>(o.dropped_single_success));
}

int cmd_build_index(const cdxstats::RunConfig& config) {
  try {
    auto result = cdxstats::run_build_index(config);
    print_parse_report(result.parse_report);
    print_filter_outcome(result.filter_outcome);
    std::printf("index: %llu domains, %llu urls, %d partitions -> %s\n",
                static_cast<unsigned long long>(result.domains),
                static_cast<unsigned long long>(result.urls),
                config.partitions, config.index_dir.string().c_str());
    return kExitOk;
  } catch (const cdxstats::StrictParseError& e) {
    std::fprintf(stderr, "strict parse aborted: %s\n", e.what());
    return kExitStrictParse;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "build-index failed: %s\n", e.what());
    return kExitIo;
  }
}

int cmd_analyze(const cdxstats::RunConfig& config) {
  try {
    auto result = cdxstats::run_analyze(config);
    print_filter_outcome(result.filter_outcome);
    std::printf("analyze: %llu domains, %zu report files in %s\n",
                static_cast<unsigned long long>(result.domains),
                result.csv_files.size(), config.out_dir.string().c_str());
    return kExitOk;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "analyze failed: %s\n", e.what());
    return kExitIo;
  }
}

struct GenerateArgs {
  cdxstats::GenConfig config;
  std::string model = "pure_growth";
  std::filesystem::path out_dir;
  bool gzip = false;
};

int cmd_generate(const GenerateArgs& args) {
  try {
    auto model = cdxstats::gen_model_from_name(args.model);
    if (!model) {
      std::fprintf(stderr, "unknown generator model: %s\n",
                   args.model.c_str());
      return kExitIo;
    }
    std::filesystem::create_directories(args.out_dir);

    auto catalog_path = args.out_dir / "catalog.tsv";
    {
      std::ofstream out(catalog_path, std::ios::binary);
      out << "# category\tdomain\n";
      for (const auto& e : cdxstats::generator_catalog(args.config))
        out << e.category << '\t' << e.domain << '\n';
    }

    cdxstats::GenStats stats;
    auto corpus_path =
        args.out_dir / (args.gzip ? "corpus.cdx.gz" : "corpus.cdx");
    if (args.gzip) {
      gzFile gz = gzopen(corpus_path.string().c_str(), "wb1");
      if (gz == nullptr)
        throw std::runtime_error("cannot create " + corpus_path.string());
      stats = cdxstats::generate_corpus(
          *model, args.config, [gz, &corpus_path](std::string_view line) {
            if (gzwrite(gz, line.data(), static_cast<unsigned>(line.size())) <=
                    0 ||
                gzwrite(gz, "\n", 1) <= 0)
              throw std::runtime_error("write failed: " +
                                       corpus_path.string());
          });
      if (gzclose(gz) != Z_OK)
        throw std::runtime_error("close failed: " + corpus_path.string());
    } else {
      std::ofstream out(corpus_path, std::ios::binary);
      if (!out)
        throw std::runtime_error("cannot create " + corpus_path.string());
      stats = cdxstats::generate_corpus(
          *model, args.config, [&out](std::string_view line) {
            out.write(line.data(),
                      static_cast<std::streamsize>(line.size()));
            out.put('\n');
          });
      out.flush();
      if (!out)
        throw std::runtime_error("write failed: " + corpus_path.string());
    }
    std::printf("generated %llu urls, %llu lines -> %s\n",
                static_cast<unsigned long long>(stats.urls),
                static_cast<unsigned long long>(stats.lines),
                corpus_path.string().c_str());
    return kExitOk;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "generate failed: %s\n", e.what());
    return kExitIo;
  }
}

struct FitArgs {
  std::filesystem::path input;
  std::string frame = "evolution";
  std::string metric;
  std::string category = "overall";
  std::string model = "linear";
  int x_origin = 1996;
  std::filesystem::path out;
};

int cmd_fit(const FitArgs& args) {
  try {
    auto series = cdxstats::load_metric_series(args.input, args.frame,
                                               args.metric, args.category);
    if (series.empty()) {
      std::fprintf(stderr, "no rows match frame=%s metric=%s category=%s\n",
                   args.frame.c_str(), args.metric.c_str(),
                   args.category.c_str());
      return kExitIo;
    }
    cdxstats::FitModel model = args.model == "exponential"
                                   ? cdxstats::FitModel::Exponential
                                   : cdxstats::FitModel::Linear;
    std::vector<double> x, y;
    for (const auto& [i, value] : series) {
      x.push_back(static_cast<double>(i - args.x_origin));
      y.push_back(value);
    }
    cdxstats::FitResult result = cdxstats::fit(x, y, model);

    cdxstats::FitRow row;
    row.metric = args.metric;
    row.model = std::string(cdxstats::fit_model_name(model));
    for (std::size_t i = 0; i < result.n_params(); ++i) {
      row.params.push_back(result.params[i]);
      row.err_pct.push_back(result.err_pct[i]);
    }
    row.residual_rms = result.residual_rms;
    std::string csv = cdxstats::render_fits_csv({&row, 1});
    std::fputs(csv.c_str(), stdout);
    if (!args.out.empty()) {
      std::ofstream out(args.out, std::ios::binary);
      out << csv;
    }
    return kExitOk;
  } catch (const cdxstats::FitError& e) {
    std::fprintf(stderr, "fit failed: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fit failed: %s\n", e.what());
    return kExitIo;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CDX web-archive longitudinal statistics toolkit"};
  app.require_subcommand(1);

  cdxstats::RunConfig build_config;
  auto* build = app.add_subcommand("build-index",
                                   "Parse CDX manifests into a domain index");
  build->add_option("--cdx", build_config.cdx_paths,
                    "CDX files or directories")
      ->required();
  build->add_option("--catalog", build_config.catalog_path,
                    "category<TAB>domain catalog file")
      ->required();
  build->add_option("--index", build_config.index_dir, "Index directory")
      ->required();
  build->add_option("--partitions", build_config.partitions,
                    "Number of index partitions")
      ->check(CLI::Range(1, 4096));
  build->add_option_function<std::uint64_t>(
      "--sort-buffer-mb",
      [&build_config](std::uint64_t mb) {
        build_config.sort_buffer_bytes = mb << 20;
      },
      "External sort buffer (MiB)");
  build->add_flag("--strict", build_config.strict_parse,
                  "Abort on the first malformed line");
  add_common_flags(build, build_config);

  cdxstats::RunConfig analyze_config;
  auto* analyze =
      app.add_subcommand("analyze", "Compute statistics and reports");
  analyze->add_option("--index", analyze_config.index_dir, "Index directory")
      ->required();
  analyze->add_option("--catalog", analyze_config.catalog_path,
                      "category<TAB>domain catalog file")
      ->required();
  analyze->add_option("--out", analyze_config.out_dir, "Report directory")
      ->required();
  analyze->add_option("--registered-domains",
                      analyze_config.external_series_path,
                      "External (year,count) overlay series");
  analyze->add_flag("--include-censored",
                    analyze_config.include_censored_urlage,
                    "Count still-alive URLs in the URL-age populations");
  analyze->add_flag("--dump-tables", analyze_config.dump_tables,
                    "Also write the per-domain property tables as TSV");
  add_common_flags(analyze, analyze_config);

  GenerateArgs gen_args;
  auto* generate =
      app.add_subcommand("generate", "Emit a synthetic CDX corpus");
  generate->add_option("--model", gen_args.model,
                       "pure_growth | geometric_lifespan | paper_trend");
  generate->add_option("--out", gen_args.out_dir, "Output directory")
      ->required();
  generate->add_option("--urls", gen_args.config.urls, "Total URL target");
  generate->add_option("--domains", gen_args.config.domains,
                       "Number of domains");
  generate->add_option("--categories", gen_args.config.categories,
                       "Number of catalog categories");
  generate->add_option("--p", gen_args.config.death_p,
                       "geometric_lifespan death parameter");
  generate->add_flag("--gzip", gen_args.gzip, "GZip-compress the corpus");
  generate->add_option("--first-year", gen_args.config.first_year,
                       "First calendar year");
  generate->add_option("--final-year", gen_args.config.final_year,
                       "Final calendar year");
  generate->add_option("--tld", gen_args.config.tld, "TLD suffix");
  generate->add_option("--seed", gen_args.config.seed, "Random seed")
      ->envname("CDXSTATS_SEED");

  FitArgs fit_args;
  auto* fit_cmd =
      app.add_subcommand("fit", "Fit a trend model to a metric CSV");
  fit_cmd->add_option("--input", fit_args.input, "Metric CSV file")
      ->required();
  fit_cmd->add_option("--metric", fit_args.metric, "Metric id column value")
      ->required();
  fit_cmd->add_option("--frame", fit_args.frame,
                      "evolution | domain_age | url_age");
  fit_cmd->add_option("--category", fit_args.category, "Category");
  fit_cmd->add_option("--model", fit_args.model, "linear | exponential");
  fit_cmd->add_option("--x-origin", fit_args.x_origin,
                      "Year subtracted from i to form x");
  fit_cmd->add_option("--out", fit_args.out, "Also write the row to a CSV");

  CLI11_PARSE(app, argc, argv);

  if (build->parsed()) return cmd_build_index(build_config);
  if (analyze->parsed()) return cmd_analyze(analyze_config);
  if (generate->parsed()) return cmd_generate(gen_args);
  if (fit_cmd->parsed()) return cmd_fit(fit_args);
  return kExitOk;
}
