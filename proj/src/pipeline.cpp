#include "cdxstats/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <queue>
#include <thread>

#include "cdxstats/lifespan.hpp"
#include "cdxstats/stats.hpp"

namespace cdxstats {

namespace {

// ---------------------------------------------------------------------
// sort entries: memcmp-sortable strings
//   domain \0 url_key \0 ts(8, big endian) seq(8, big endian)
//   payload after the key: status(4) size(8), never reached by compares
// because seq is unique.
// ---------------------------------------------------------------------

void put_be64(std::string& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8)
    out.push_back(static_cast<char>((v >> shift) & 0xff));
}

std::uint64_t get_be64(const char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v = (v << 8) | static_cast<unsigned char>(p[i]);
  return v;
}

void put_le32(std::string& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8)
    out.push_back(static_cast<char>((v >> shift) & 0xff));
}

std::uint32_t get_le32(const char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
  return v;
}

struct DecodedEntry {
  std::string_view domain;
  std::string_view url_key;
  Instant ts = 0;
  int status = -1;
  std::int64_t size = -1;
};

std::string encode_entry(std::string_view domain, std::string_view url_key,
                         Instant ts, std::uint64_t seq, int status,
                         std::int64_t size) {
  std::string e;
  e.reserve(domain.size() + url_key.size() + 30);
  e.append(domain);
  e.push_back('\0');
  e.append(url_key);
  e.push_back('\0');
  put_be64(e, static_cast<std::uint64_t>(ts));
  put_be64(e, seq);
  put_le32(e, static_cast<std::uint32_t>(status));
  put_be64(e, static_cast<std::uint64_t>(size));
  return e;
}

DecodedEntry decode_entry(const std::string& e) {
  DecodedEntry d;
  std::size_t z1 = e.find('\0');
  std::size_t z2 = e.find('\0', z1 + 1);
  d.domain = std::string_view(e).substr(0, z1);
  d.url_key = std::string_view(e).substr(z1 + 1, z2 - z1 - 1);
  const char* p = e.data() + z2 + 1;
  d.ts = static_cast<Instant>(get_be64(p));
  d.status = static_cast<int>(get_le32(p + 16));
  d.size = static_cast<std::int64_t>(get_be64(p + 20));
  return d;
}

// key prefix for duplicate detection: domain \0 url \0 ts
std::string_view entry_dedup_key(const std::string& e) {
  std::size_t z2 = e.find('\0', e.find('\0') + 1);
  return std::string_view(e).substr(0, z2 + 9);
}

// run files: u32 length + bytes per entry
void write_run(const std::filesystem::path& file,
               std::vector<std::string>& entries) {
  std::sort(entries.begin(), entries.end());
  std::FILE* f = std::fopen(file.string().c_str(), "wb");
  if (f == nullptr)
    throw std::runtime_error("cannot create spill file " + file.string());
  std::vector<char> iobuf(1u << 20);
  std::setvbuf(f, iobuf.data(), _IOFBF, iobuf.size());
  for (const std::string& e : entries) {
    std::uint32_t len = static_cast<std::uint32_t>(e.size());
    if (std::fwrite(&len, sizeof(len), 1, f) != 1 ||
        std::fwrite(e.data(), 1, e.size(), f) != e.size()) {
      std::fclose(f);
      throw std::runtime_error("spill write failed: " + file.string());
    }
  }
  if (std::fclose(f) != 0)
    throw std::runtime_error("spill close failed: " + file.string());
  entries.clear();
}

class RunReader {
 public:
  explicit RunReader(const std::filesystem::path& file)
      : f_(std::fopen(file.string().c_str(), "rb")), iobuf_(1u << 20) {
    if (f_ == nullptr)
      throw std::runtime_error("cannot open spill file " + file.string());
    std::setvbuf(f_, iobuf_.data(), _IOFBF, iobuf_.size());
  }
  ~RunReader() {
    if (f_ != nullptr) std::fclose(f_);
  }
  RunReader(const RunReader&) = delete;

  bool next(std::string& entry) {
    std::uint32_t len = 0;
    if (std::fread(&len, sizeof(len), 1, f_) != 1) return false;
    entry.resize(len);
    if (std::fread(entry.data(), 1, len, f_) != len)
      throw std::runtime_error("truncated spill file");
    return true;
  }

 private:
  std::FILE* f_;
  std::vector<char> iobuf_;
};

std::vector<std::filesystem::path> expand_manifests(
    const std::vector<std::filesystem::path>& paths) {
  std::vector<std::filesystem::path> files;
  for (const auto& p : paths) {
    if (std::filesystem::is_directory(p)) {
      for (const auto& e : std::filesystem::directory_iterator(p)) {
        if (!e.is_regular_file()) continue;
        auto name = e.path().filename().string();
        if (name.ends_with(".cdx") || name.ends_with(".cdx.gz"))
          files.push_back(e.path());
      }
    } else if (std::filesystem::is_regular_file(p)) {
      files.push_back(p);
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

// streaming FilterOutcome preview over sorted merged entries
class FilterPreview {
 public:
  explicit FilterPreview(int final_year) : final_year_(final_year) {}

  void add(const DecodedEntry& e) {
    if (e.domain != domain_ || e.url_key != url_) {
      close_url();
      if (e.domain != domain_) {
        ++domains_;
        domain_.assign(e.domain);
      }
      url_.assign(e.url_key);
    }
    captures_.push_back({e.ts, e.status, e.size});
  }

  void finish() { close_url(); }

  const FilterOutcome& outcome() const { return outcome_; }
  std::uint64_t domains() const { return domains_; }
  std::uint64_t urls() const { return urls_; }

 private:
  void close_url() {
    if (captures_.empty()) return;
    ++urls_;
    switch (classify_url(url_, captures_, final_year_)) {
      case FilterRule::Keep: ++outcome_.kept_urls; break;
      case FilterRule::Extension: ++outcome_.dropped_extension; break;
      case FilterRule::NeverSuccessful:
        ++outcome_.dropped_never_successful;
        break;
      case FilterRule::NotCrawledFinalYear:
        ++outcome_.dropped_not_crawled_final_year;
        break;
      case FilterRule::SingleSuccess:
        ++outcome_.dropped_single_success;
        break;
    }
    captures_.clear();
  }

  int final_year_;
  std::string domain_;
  std::string url_;
  std::vector<Capture> captures_;
  FilterOutcome outcome_;
  std::uint64_t domains_ = 0;
  std::uint64_t urls_ = 0;
};

double series_mean(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

namespace {

void validate_years(const RunConfig& config) {
  if (config.first_year > config.final_year)
    throw std::runtime_error("first year " +
                             std::to_string(config.first_year) +
                             " is after final year " +
                             std::to_string(config.final_year));
}

}  // namespace

BuildIndexResult run_build_index(const RunConfig& config) {
  validate_years(config);
  auto files = expand_manifests(config.cdx_paths);
  if (files.empty()) throw std::runtime_error("no manifests found");

  DomainCatalog catalog =
      DomainCatalog::load(config.catalog_path, config.tld_suffix);

  std::filesystem::create_directories(config.index_dir);
  std::filesystem::path tmp_dir = config.index_dir / "tmp-build";
  std::filesystem::remove_all(tmp_dir);
  std::filesystem::create_directories(tmp_dir);

  const unsigned n_threads =
      std::max(1u, std::min<unsigned>(config.threads,
                                      static_cast<unsigned>(files.size())));
  const std::uint64_t budget =
      std::max<std::uint64_t>(16u << 20, config.sort_buffer_bytes / n_threads);

  std::vector<ParseReport> reports(files.size());
  std::vector<std::filesystem::path> runs;
  std::mutex runs_mutex;
  std::atomic<std::size_t> next_file{0};
  std::atomic<std::uint64_t> run_counter{0};
  std::vector<std::exception_ptr> errors(n_threads);

  auto worker = [&](unsigned thread_idx) {
    try {
      std::vector<std::string> entries;
      std::uint64_t bytes = 0;
      auto flush = [&]() {
        if (entries.empty()) return;
        auto run = tmp_dir / ("run-" + std::to_string(run_counter++) + ".bin");
        write_run(run, entries);
        bytes = 0;
        std::lock_guard<std::mutex> lock(runs_mutex);
        runs.push_back(run);
      };

      while (true) {
        std::size_t idx = next_file.fetch_add(1);
        if (idx >= files.size()) break;
        ManifestReader reader(files[idx], config.strict_parse);
        CaptureRecord rec;
        std::uint64_t line = 0;
        std::string host;
        while (reader.next(rec)) {
          ++line;
          host = host_from_url_key(rec.canonical_url);
          auto domain = registered_domain(host, config.tld_suffix);
          if (!domain || !catalog.contains(*domain)) continue;
          std::uint64_t seq =
              (static_cast<std::uint64_t>(idx) << 40) | (line & 0xffffffffffull);
          entries.push_back(encode_entry(*domain, rec.canonical_url,
                                         rec.timestamp, seq, rec.status,
                                         rec.size));
          bytes += entries.back().size() + 48;
          if (bytes >= budget) flush();
        }
        reports[idx] = reader.report();
      }
      flush();
    } catch (...) {
      errors[thread_idx] = std::current_exception();
    }
  };

  if (n_threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker, t);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  BuildIndexResult result;
  for (const auto& r : reports) result.parse_report.merge(r);

  // merge all runs, deduplicate, route to the hash partitions
  std::vector<std::unique_ptr<RunReader>> readers;
  using HeapItem = std::pair<std::string, std::size_t>;
  auto heap_cmp = [](const HeapItem& a, const HeapItem& b) {
    return a.first > b.first;
  };
  std::priority_queue<HeapItem, std::vector<HeapItem>, decltype(heap_cmp)>
      heap(heap_cmp);
  for (const auto& run : runs) {
    readers.push_back(std::make_unique<RunReader>(run));
    std::string entry;
    if (readers.back()->next(entry))
      heap.emplace(std::move(entry), readers.size() - 1);
  }

  std::vector<PartitionWriter> writers;
  char name[32];
  for (int p = 0; p < config.partitions; ++p) {
    std::snprintf(name, sizeof(name), "part-%04d.gz", p);
    writers.emplace_back(config.index_dir / name);
  }

  FilterPreview preview(config.final_year);
  std::string prev_key;
  std::string entry;
  while (!heap.empty()) {
    entry = heap.top().first;
    std::size_t src = heap.top().second;
    heap.pop();
    std::string refill;
    if (readers[src]->next(refill)) heap.emplace(std::move(refill), src);

    std::string_view key = entry_dedup_key(entry);
    if (key == prev_key) continue;  // duplicate (url, timestamp): keep first
    prev_key.assign(key);

    DecodedEntry d = decode_entry(entry);
    writers[partition_of(d.domain, config.partitions)].add(
        d.domain, d.url_key, d.ts, d.status, d.size);
    preview.add(d);
  }
  preview.finish();

  IndexManifest manifest;
  manifest.partitions = config.partitions;
  for (auto& w : writers) manifest.files.push_back(w.finish());
  manifest.save(config.index_dir);

  readers.clear();
  std::filesystem::remove_all(tmp_dir);

  result.filter_outcome = preview.outcome();
  result.domains = preview.domains();
  result.urls = preview.urls();
  result.manifest = std::move(manifest);
  return result;
}

DomainStats domain_stats_from_timeline(const DomainTimeline& timeline,
                                       const RunConfig& config,
                                       FilterOutcome& outcome) {
  DomainStats stats;
  stats.domain = timeline.domain;
  stats.urls_prefilter = timeline.urls.size();

  DomainTimeline kept = apply_filters(timeline, config.final_year, outcome);
  stats.urls_kept = kept.urls.size();
  if (kept.urls.empty()) return stats;

  stats.subdomains = host_set(kept).size();
  stats.captured_in_year.assign(
      static_cast<std::size_t>(config.final_year - config.first_year + 1), 0);
  for (const UrlHistory& url : kept.urls) {
    for (const Capture& c : url.captures) {
      int y = year_of(c.ts);
      if (y < config.first_year || y > config.final_year) continue;
      stats.captured_in_year[static_cast<std::size_t>(y - config.first_year)] =
          1;
    }
  }

  DomainLife life = derive_domain_life(kept);
  stats.birth = life.birth;
  stats.evolution =
      evolution_table(life, config.first_year, config.final_year);
  stats.domain_age = domain_age_table(life, config.final_year);
  stats.url_age = url_age_table(life, config.final_year,
                                config.include_censored_urlage);
  return stats;
}

std::vector<std::pair<int, std::int64_t>> load_external_series(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open external series " + path.string());
  std::vector<std::pair<int, std::int64_t>> series;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    for (char& c : line)
      if (c == '\t' || c == ';') c = ',';
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("external series line without separator: " +
                               line);
    int year = 0;
    std::int64_t count = 0;
    auto r1 = std::from_chars(line.data(), line.data() + comma, year);
    auto r2 = std::from_chars(line.data() + comma + 1,
                              line.data() + line.size(), count);
    if (r1.ec != std::errc() || r2.ec != std::errc())
      throw std::runtime_error("bad external series line: " + line);
    series.emplace_back(year, count);
  }
  return series;
}

std::string render_fits_csv(std::span<const FitRow> rows) {
  std::string out =
      "metric,model,a,b,c,err_a_pct,err_b_pct,err_c_pct,residual_rms\n";
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return std::string(buf);
  };
  for (const FitRow& r : rows) {
    out += r.metric;
    out += ',';
    out += r.model;
    for (std::size_t i = 0; i < 3; ++i) {
      out += ',';
      if (i < r.params.size()) out += num(r.params[i]);
    }
    for (std::size_t i = 0; i < 3; ++i) {
      out += ',';
      if (i < r.err_pct.size()) out += num(r.err_pct[i]);
    }
    out += ',';
    out += num(r.residual_rms);
    out += '\n';
  }
  return out;
}

AnalyzeResult run_analyze(const RunConfig& config) {
  validate_years(config);
  DomainCatalog catalog =
      DomainCatalog::load(config.catalog_path, config.tld_suffix);
  IndexManifest manifest = IndexManifest::load(config.index_dir);

  const std::size_t n_files = manifest.files.size();
  const unsigned n_threads = std::max(
      1u,
      std::min<unsigned>(config.threads, static_cast<unsigned>(n_files)));

  std::vector<std::vector<DomainStats>> partial(n_files);
  std::vector<FilterOutcome> outcomes(n_files);
  std::atomic<std::size_t> next_partition{0};
  std::vector<std::exception_ptr> errors(n_threads);

  auto worker = [&](unsigned thread_idx) {
    try {
      while (true) {
        std::size_t p = next_partition.fetch_add(1);
        if (p >= n_files) break;
        IndexReader reader(config.index_dir, p, p + 1);
        DomainTimeline timeline;
        while (reader.next_timeline(timeline)) {
          partial[p].push_back(
              domain_stats_from_timeline(timeline, config, outcomes[p]));
        }
      }
    } catch (...) {
      errors[thread_idx] = std::current_exception();
    }
  };

  if (n_threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker, t);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  AnalyzeResult result;
  std::vector<DomainStats> all;
  for (std::size_t p = 0; p < n_files; ++p) {
    for (auto& s : partial[p]) all.push_back(std::move(s));
    result.filter_outcome += outcomes[p];
  }
  std::sort(all.begin(), all.end(),
            [](const DomainStats& a, const DomainStats& b) {
              return a.domain < b.domain;
            });
  result.domains = all.size();

  // metric stats: domains that kept at least one URL
  std::vector<DomainStats> with_data;
  for (const DomainStats& s : all)
    if (s.urls_kept > 0 && !s.evolution.empty()) with_data.push_back(s);

  MetricsOptions options;
  options.first_year = config.first_year;
  options.final_year = config.final_year;
  if (!config.external_series_path.empty())
    options.external_series = load_external_series(config.external_series_path);

  std::filesystem::create_directories(config.out_dir);
  auto groups = compute_all_metrics(with_data, catalog, options);
  for (const MetricGroup& g : groups) {
    auto file = config.out_dir / (g.name + ".csv");
    write_metric_csv(file, g.series);
    result.csv_files.push_back(file);
  }

  // trend fits on the overall series, x = years since first_year
  std::vector<FitRow> fit_rows;
  auto add_fit = [&](const MetricSeries& series, FitModel model,
                     const std::string& label) {
    std::vector<double> x, y;
    for (const MetricPoint& p : series.points) {
      if (p.category != "overall") continue;
      x.push_back(static_cast<double>(p.i - config.first_year));
      y.push_back(p.value);
    }
    std::size_t need = model == FitModel::Linear ? 2 : 3;
    if (x.size() < need) return;
    try {
      FitResult fr = fit(x, y, model);
      FitRow row;
      row.metric = label;
      row.model = std::string(fit_model_name(model));
      for (std::size_t i = 0; i < fr.n_params(); ++i) {
        row.params.push_back(fr.params[i]);
        row.err_pct.push_back(fr.err_pct[i]);
      }
      row.residual_rms = fr.residual_rms;
      fit_rows.push_back(std::move(row));
    } catch (const FitError& e) {
      std::fprintf(stderr, "fit skipped for %s: %s\n", label.c_str(),
                   e.what());
    }
  };

  for (const MetricGroup& g : groups) {
    if (g.name == "average_age_evolution") {
      add_fit(g.series[0], FitModel::Linear, "average_age_months");
    } else if (g.name == "avg_domain_volume") {
      add_fit(g.series[0], FitModel::Exponential, "avg_domain_volume");
    } else if (g.name == "avg_birth_size_evolution") {
      add_fit(g.series[0], FitModel::Linear, "avg_birth_size");
    } else if (g.name == "age_bucket_fractions") {
      // constant least-squares fit of the under-a-year fraction
      std::vector<double> y;
      for (const MetricPoint& p : g.series[0].points)
        if (p.category == "overall") y.push_back(p.value);
      if (!y.empty()) {
        double mean = series_mean(y);
        double ssr = 0;
        for (double v : y) ssr += (v - mean) * (v - mean);
        FitRow row;
        row.metric = "age_bucket_fraction_b0";
        row.model = "constant";
        row.params = {mean};
        row.err_pct = {0.0};
        row.residual_rms = std::sqrt(ssr / static_cast<double>(y.size()));
        fit_rows.push_back(std::move(row));
      }
    }
  }
  {
    auto file = config.out_dir / "fits.csv";
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << render_fits_csv(fit_rows);
    result.csv_files.push_back(file);
  }

  // dataset summary, one row per category plus a total row
  {
    std::map<std::string_view, const DomainStats*> by_name;
    for (const DomainStats& s : all) by_name.emplace(s.domain, &s);
    std::string out_str = "category,domains,sub_domains,urls,urls_prefilter\n";
    auto emit_row = [&out_str](std::string_view category, std::uint64_t dom,
                               std::uint64_t sub, std::uint64_t kept,
                               std::uint64_t pre) {
      out_str += category;
      out_str += ',' + std::to_string(dom) + ',' + std::to_string(sub) + ',' +
                 std::to_string(kept) + ',' + std::to_string(pre) + '\n';
    };
    auto accumulate = [&by_name](const std::vector<std::string>& domains,
                                 std::uint64_t& dom, std::uint64_t& sub,
                                 std::uint64_t& kept, std::uint64_t& pre) {
      for (const auto& d : domains) {
        auto it = by_name.find(d);
        if (it == by_name.end()) continue;
        const DomainStats* s = it->second;
        if (s->urls_kept > 0) ++dom;
        sub += s->subdomains;
        kept += s->urls_kept;
        pre += s->urls_prefilter;
      }
    };
    for (const std::string& cat : catalog.categories()) {
      std::vector<std::string> members;
      std::set<std::string> seen;
      for (const CatalogEntry& e : catalog.entries)
        if (e.category == cat && seen.insert(e.domain).second)
          members.push_back(e.domain);
      std::uint64_t dom = 0, sub = 0, kept = 0, pre = 0;
      accumulate(members, dom, sub, kept, pre);
      emit_row(cat, dom, sub, kept, pre);
    }
    std::uint64_t dom = 0, sub = 0, kept = 0, pre = 0;
    accumulate(catalog.domains(), dom, sub, kept, pre);
    emit_row("TOTAL", dom, sub, kept, pre);

    auto file = config.out_dir / "dataset_summary.csv";
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << out_str;
    result.csv_files.push_back(file);
  }

  if (config.dump_tables) {
    std::vector<std::pair<std::string, std::vector<EvolutionRow>>> evo, dage;
    std::vector<std::pair<std::string, std::vector<UrlAgeRow>>> uage;
    for (const DomainStats& s : with_data) {
      evo.emplace_back(s.domain, s.evolution);
      dage.emplace_back(s.domain, s.domain_age);
      uage.emplace_back(s.domain, s.url_age);
    }
    write_evolution_tsv(config.out_dir / "evolution_tables.tsv", evo);
    write_evolution_tsv(config.out_dir / "domain_age_tables.tsv", dage);
    write_url_age_tsv(config.out_dir / "url_age_tables.tsv", uage);
  }
  return result;
}

std::vector<std::pair<std::int64_t, double>> load_metric_series(
    const std::filesystem::path& csv, std::string_view frame,
    std::string_view metric, std::string_view category) {
  std::ifstream in(csv);
  if (!in) throw std::runtime_error("cannot open " + csv.string());
  std::vector<std::pair<std::int64_t, double>> series;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::array<std::string_view, 6> cols;
    std::string_view view = line;
    std::size_t pos = 0;
    for (int i = 0; i < 6; ++i) {
      auto comma = view.find(',', pos);
      if (comma == std::string_view::npos) {
        cols[static_cast<std::size_t>(i)] = view.substr(pos);
        break;
      }
      cols[static_cast<std::size_t>(i)] = view.substr(pos, comma - pos);
      pos = comma + 1;
    }
    if (cols[0] != frame || cols[1] != metric || cols[2] != category)
      continue;
    std::int64_t i = 0;
    auto r1 = std::from_chars(cols[3].data(), cols[3].data() + cols[3].size(),
                              i);
    double value = std::strtod(std::string(cols[4]).c_str(), nullptr);
    if (r1.ec != std::errc())
      throw std::runtime_error("bad metric csv row: " + line);
    series.emplace_back(i, value);
  }
  std::sort(series.begin(), series.end());
  return series;
}

}  // namespace cdxstats
