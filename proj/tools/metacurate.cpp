// metacurate: deterministic metadata-balanced corpus curation.
//
// Subcommands cover the full two-pass flow (build-metadata, match,
// reduce-counts, balance) plus distribution analysis (summarize, stats),
// planning (plan), an online-balancing simulator (loader-sim), a
// synthetic pool generator (synth), and the end-to-end orchestrator
// (run).

#include <glob.h>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "metacurate/metacurate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> expand_glob(const std::string& pattern) {
  glob_t g;
  std::vector<std::string> paths;
  int rc = glob(pattern.c_str(), GLOB_TILDE, nullptr, &g);
  if (rc == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) paths.emplace_back(g.gl_pathv[i]);
  }
  globfree(&g);
  if (rc != 0 && rc != GLOB_NOMATCH)
    throw metacurate::IoError("glob failed for pattern: " + pattern);
  return paths;
}

fs::path summary_path_for(const fs::path& counts_path) {
  fs::path p = counts_path;
  p.replace_extension(".summary.json");
  return p;
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw metacurate::IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

int cmd_build_metadata(const std::string& unigrams, const std::string& bigrams,
                       const std::string& titles, const std::string& synsets,
                       std::uint64_t budget, std::uint64_t unigram_min,
                       std::uint64_t bigram_budget, const std::string& out) {
  using namespace metacurate;
  std::vector<SourceLexicon> sources;
  sources.push_back(load_lexicon_tsv(unigrams, SourceKind::kWikiUnigrams));
  sources.push_back(load_lexicon_tsv(bigrams, SourceKind::kWikiBigrams));
  sources.push_back(load_lexicon_tsv(titles, SourceKind::kWikiTitles));
  sources.push_back(load_lexicon_tsv(synsets, SourceKind::kWordNetSynsets));
  BudgetPlan plan{budget, unigram_min, bigram_budget};
  BuildReport report;
  auto entries = build_metadata(sources, plan, &report);
  write_metadata(out, entries);
  write_build_manifest(out + ".manifest.json", report);
  json j = {{"total", report.total},
            {"wordnet_synsets", report.synsets},
            {"wiki_unigrams", report.unigrams},
            {"wiki_bigrams", report.bigrams},
            {"wiki_titles", report.titles},
            {"pmi_threshold", report.pmi_threshold}};
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_match(const std::string& metadata_path, const std::string& in,
              const std::string& out, const std::string& counts_path,
              bool raw_substring) {
  using namespace metacurate;
  auto surfaces = load_metadata(metadata_path);
  std::string sha = sha256_file(metadata_path);
  MatchOptions opts;
  if (raw_substring) opts.boundary = BoundaryMode::kRawSubstring;
  MatchAutomaton automaton(surfaces, opts);
  JsonlReader reader(in);
  JsonlWriter writer(out);
  EntryCounts counts = EntryCounts::zeros(surfaces.size());
  auto sum = match_shard(automaton, reader, writer, counts);
  writer.close();
  write_counts_csv(counts_path, counts, sha);
  json j = {{"records_in", sum.records_in},
            {"records_matched", sum.records_matched},
            {"records_skipped", sum.records_skipped}};
  write_json_file(summary_path_for(counts_path), j);
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_reduce_counts(const std::string& metadata_path,
                      const std::vector<std::string>& shard_csvs,
                      const std::string& out) {
  using namespace metacurate;
  std::string sha = sha256_file(metadata_path);
  std::vector<EntryCounts> shards;
  for (const auto& path : shard_csvs) {
    auto lc = load_counts_csv(path);
    if (lc.metadata_sha != sha)
      throw DataError(path + ": counts were built against different metadata (" +
                      lc.metadata_sha + " != " + sha + ")");
    shards.push_back(std::move(lc.counts));
  }
  EntryCounts global = merge_counts(shards);
  write_counts_csv(out, global, sha);
  json j = {{"shards", shards.size()},
            {"entries", global.counts.size()},
            {"total", global.total}};
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_summarize(const std::string& counts_path, std::uint64_t t,
                  std::size_t top_k) {
  using namespace metacurate;
  auto lc = load_counts_csv(counts_path);
  auto s = summarize(lc.counts, t, top_k);
  json top = json::array();
  for (const auto& [id, cnt] : s.top) top.push_back({{"entry_id", id}, {"count", cnt}});
  json j = {{"t", t},
            {"entries", lc.counts.counts.size()},
            {"total", lc.counts.total},
            {"zero_entries", s.zero_entries},
            {"above_t_entries", s.above_t_entries},
            {"above_t_total", s.above_t_total},
            {"share_above_t", s.share_above_t},
            {"top", top}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_balance(const std::string& counts_path, const std::string& metadata_path,
                std::uint64_t t, std::uint64_t seed, const std::string& in,
                const std::string& out) {
  using namespace metacurate;
  std::string sha = sha256_file(metadata_path);
  auto lc = load_counts_csv(counts_path);
  if (lc.metadata_sha != sha)
    throw DataError("counts digest " + lc.metadata_sha +
                    " does not match metadata file digest " + sha);
  auto probs = compute_probabilities(lc.counts, t, lc.metadata_sha);
  CurationConfig cfg{t, seed, sha};
  JsonlReader reader(in, /*want_matches=*/true);
  JsonlWriter writer(out);
  auto sum = curate_shard(reader, writer, probs, cfg);
  writer.close();
  json j = {{"records_in", sum.records_in},
            {"records_kept", sum.records_kept},
            {"keep_rate", sum.keep_rate()}};
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_plan(const std::string& counts_path, const std::string& matched,
             std::uint64_t t) {
  using namespace metacurate;
  auto lc = load_counts_csv(counts_path);
  auto probs = compute_probabilities(lc.counts, t, lc.metadata_sha);
  JsonlReader reader(matched, /*want_matches=*/true);
  ExpectedSizeAccumulator acc(probs);
  Record rec;
  while (reader.next(rec)) acc.add(rec.matched_entry_ids);
  json j = {{"t", t},
            {"records", acc.records()},
            {"expected_curated_size", acc.expected()}};
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_loader_sim(const std::string& counts_path, const std::string& in,
                   std::uint64_t t, std::uint64_t seed, std::uint64_t epochs,
                   const std::string& out_prefix, std::size_t shuffle_buffer) {
  using namespace metacurate;
  auto lc = load_counts_csv(counts_path);
  auto probs = compute_probabilities(lc.counts, t, lc.metadata_sha);
  json report;
  report["epochs"] = json::array();
  for (std::uint64_t e = 0; e < epochs; ++e) {
    auto plan = EpochPlan::make(seed, e, shuffle_buffer);
    std::string out = out_prefix + std::to_string(e) + ".jsonl";
    JsonlReader reader(in, /*want_matches=*/true);
    JsonlWriter writer(out);
    auto sum = stream_epoch(
        reader, probs, plan, [&](Record&& r) { writer.write(r); }, &lc.counts, t);
    writer.close();
    report["epochs"].push_back({{"epoch", e},
                                {"output", out},
                                {"records_in", sum.records_in},
                                {"records_kept", sum.records_kept},
                                {"kept_with_tail", sum.kept_with_tail},
                                {"kept_head_only", sum.kept_head_only}});
  }
  write_json_file(out_prefix + "report.json", report);
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_stats_curve(const std::string& counts_path, std::uint64_t t,
                    const std::string& out) {
  using namespace metacurate;
  auto lc = load_counts_csv(counts_path);
  auto series = cumulative_curve(lc.counts, t);
  write_curve_csv(out, series);
  std::uint64_t capped_total =
      series.points.empty() ? 0 : series.points.back().cum_capped;
  json j = {{"t", t},
            {"entries", series.points.size()},
            {"raw_total", lc.counts.total},
            {"capped_total", capped_total}};
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_stats_tail_ratio(const std::string& counts_path, std::uint64_t t) {
  using namespace metacurate;
  auto lc = load_counts_csv(counts_path);
  double raw_share = tail_ratio(lc.counts, t);
  std::uint64_t tail = 0, capped = 0;
  for (auto c : lc.counts.counts) {
    if (c <= t) tail += c;
    capped += std::min(c, t);
  }
  json j = {{"t", t},
            {"tail_ratio", raw_share},
            {"tail_total", tail},
            {"raw_total", lc.counts.total},
            {"capped_total", capped},
            {"tail_share_of_capped",
             capped == 0 ? 0.0 : static_cast<double>(tail) / static_cast<double>(capped)}};
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_stats_estimate_t(const std::string& counts_path, double target_ratio) {
  using namespace metacurate;
  auto lc = load_counts_csv(counts_path);
  std::uint64_t t = estimate_t_for_tail_ratio(lc.counts, target_ratio);
  json j = {{"target_ratio", target_ratio},
            {"t", t},
            {"achieved_ratio", tail_ratio(lc.counts, t)}};
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_run(const std::string& metadata_path, const std::string& shards_glob,
            std::uint64_t t, std::uint64_t seed, const std::string& workdir,
            std::size_t workers, bool raw_substring) {
  using namespace metacurate;
  PipelineConfig config;
  config.metadata_path = metadata_path;
  config.shard_paths = expand_glob(shards_glob);
  if (config.shard_paths.empty())
    throw ConfigError("no shards match pattern: " + shards_glob);
  config.t = t;
  config.seed = seed;
  config.workdir = workdir;
  config.workers = workers;
  if (raw_substring) config.match_options.boundary = BoundaryMode::kRawSubstring;
  auto manifest = run_pipeline(config);
  json j = {{"shards", manifest.shards.size()},
            {"records_in", manifest.total_in},
            {"records_matched", manifest.total_matched},
            {"records_curated", manifest.total_curated},
            {"match_rate", manifest.match_rate},
            {"balance_rate", manifest.balance_rate},
            {"overall_rate", manifest.overall_rate},
            {"ok", manifest.ok()},
            {"manifest", (fs::path(workdir) / "manifest.json").string()}};
  std::cout << j.dump(2) << "\n";
  if (!manifest.ok()) {
    for (const auto& s : manifest.shards)
      if (!s.error.empty())
        std::cerr << "metacurate: shard " << s.input << ": " << s.error << "\n";
    return 1;
  }
  return 0;
}

int cmd_synth(std::uint32_t entries, std::uint64_t records, double zipf,
              double mean_matches, std::uint64_t seed, const std::string& out,
              std::uint32_t shards) {
  using namespace metacurate;
  SynthSpec spec{entries, records, zipf, mean_matches, seed};
  auto gen = generate_pool(spec, out, shards);
  json j = {{"metadata", gen.metadata_path.string()},
            {"truth", gen.truth_path.string()},
            {"shards", gen.shard_paths.size()},
            {"records", gen.records},
            {"matched_records", gen.matched_records},
            {"realized_mean_matches", gen.realized_mean_matches}};
  std::cout << j.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"metadata-balanced corpus curation"};
  app.require_subcommand(1);

  // build-metadata
  std::string bm_unigrams, bm_bigrams, bm_titles, bm_synsets, bm_out;
  std::uint64_t bm_budget = 500'000, bm_unigram_min = 100,
                bm_bigram_budget = 100'000;
  auto* bm = app.add_subcommand("build-metadata",
                                "build the budgeted metadata entry list");
  bm->add_option("--unigrams", bm_unigrams, "unigram TSV (surface\\tcount)")
      ->required();
  bm->add_option("--bigrams", bm_bigrams, "bigram TSV (surface\\tPMI)")
      ->required();
  bm->add_option("--titles", bm_titles, "title TSV (surface\\tviews)")
      ->required();
  bm->add_option("--synsets", bm_synsets, "synset TSV (surface[\\t0])")
      ->required();
  bm->add_option("--budget", bm_budget, "total entry budget");
  bm->add_option("--unigram-min", bm_unigram_min, "unigram count threshold");
  bm->add_option("--bigram-budget", bm_bigram_budget, "bigram entry budget");
  bm->add_option("-o,--out", bm_out, "output metadata file")->required();

  // match
  std::string m_metadata, m_in, m_out, m_counts;
  bool m_raw = false;
  auto* m = app.add_subcommand("match", "substring-match a shard");
  m->add_option("--metadata", m_metadata)->required();
  m->add_option("--in", m_in, "input JSONL shard")->required();
  m->add_option("--out", m_out, "matched JSONL output")->required();
  m->add_option("--counts", m_counts, "shard counts CSV output")->required();
  m->add_flag("--raw-substring", m_raw, "disable word-boundary checks");

  // reduce-counts
  std::string rc_metadata, rc_out;
  std::vector<std::string> rc_shards;
  auto* rc = app.add_subcommand("reduce-counts",
                                "merge shard counts into global counts");
  rc->add_option("--metadata", rc_metadata)->required();
  rc->add_option("shards", rc_shards, "shard counts CSV files")->required();
  rc->add_option("-o,--out", rc_out)->required();

  // summarize
  std::string sm_counts;
  std::uint64_t sm_t = 20'000;
  std::size_t sm_top = 20;
  auto* sm = app.add_subcommand("summarize", "distribution summary of counts");
  sm->add_option("--counts", sm_counts)->required();
  sm->add_option("--t", sm_t, "head/tail cap");
  sm->add_option("--top", sm_top, "number of top entries to report");

  // balance
  std::string b_counts, b_metadata, b_in, b_out;
  std::uint64_t b_t = 20'000, b_seed = 0;
  auto* b = app.add_subcommand("balance",
                               "curate a matched shard by independent sampling");
  b->add_option("--counts", b_counts)->required();
  b->add_option("--metadata", b_metadata)->required();
  b->add_option("--t", b_t)->required();
  b->add_option("--seed", b_seed);
  b->add_option("--in", b_in, "matched JSONL input")->required();
  b->add_option("--out", b_out, "curated JSONL output")->required();

  // plan
  std::string p_counts, p_matched;
  std::uint64_t p_t = 20'000;
  auto* p = app.add_subcommand("plan", "expected curated size for a given t");
  p->add_option("--counts", p_counts)->required();
  p->add_option("--matched", p_matched)->required();
  p->add_option("--t", p_t)->required();

  // loader-sim
  std::string ls_counts, ls_in, ls_prefix;
  std::uint64_t ls_t = 20'000, ls_seed = 0, ls_epochs = 1;
  std::size_t ls_buffer = 65'536;
  auto* ls = app.add_subcommand("loader-sim",
                                "simulate online balancing across epochs");
  ls->add_option("--counts", ls_counts)->required();
  ls->add_option("--in", ls_in, "matched JSONL pool")->required();
  ls->add_option("--t", ls_t)->required();
  ls->add_option("--seed", ls_seed);
  ls->add_option("--epochs", ls_epochs);
  ls->add_option("--out-prefix", ls_prefix)->required();
  ls->add_option("--shuffle-buffer", ls_buffer);

  // stats
  auto* st = app.add_subcommand("stats", "distribution analysis");
  st->require_subcommand(1);
  std::string sc_counts, sc_out;
  std::uint64_t sc_t = 20'000;
  auto* sc = st->add_subcommand("curve", "tail-to-head cumulative curve CSV");
  sc->add_option("--counts", sc_counts)->required();
  sc->add_option("--t", sc_t)->required();
  sc->add_option("-o,--out", sc_out)->required();
  std::string str_counts;
  std::uint64_t str_t = 20'000;
  auto* str_ = st->add_subcommand("tail-ratio", "tail share of total counts");
  str_->add_option("--counts", str_counts)->required();
  str_->add_option("--t", str_t)->required();
  std::string ste_counts;
  double ste_target = 0.06;
  auto* ste = st->add_subcommand("estimate-t",
                                 "smallest t reaching a target tail ratio");
  ste->add_option("--counts", ste_counts)->required();
  ste->add_option("--target-ratio", ste_target)->required();

  // run
  std::string r_metadata, r_shards, r_workdir;
  std::uint64_t r_t = 20'000, r_seed = 0;
  std::size_t r_workers = std::thread::hardware_concurrency();
  bool r_raw = false;
  auto* r = app.add_subcommand("run", "two-pass pipeline over a shard glob");
  r->add_option("--metadata", r_metadata)->required();
  r->add_option("--shards", r_shards, "input shard glob, e.g. 'pool/*.jsonl'")
      ->required();
  r->add_option("--t", r_t);
  r->add_option("--seed", r_seed);
  r->add_option("--workdir", r_workdir)->required();
  r->add_option("--workers", r_workers);
  r->add_flag("--raw-substring", r_raw);
  r->set_config("--config", "", "key=value config file; flags override");

  // synth
  std::uint32_t sy_entries = 5'000;
  std::uint64_t sy_records = 100'000, sy_seed = 0;
  double sy_zipf = 1.0, sy_mean = 3.5;
  std::string sy_out;
  std::uint32_t sy_shards = 1;
  auto* sy = app.add_subcommand("synth", "generate a synthetic Zipf pool");
  sy->add_option("--entries", sy_entries);
  sy->add_option("--records", sy_records);
  sy->add_option("--zipf", sy_zipf);
  sy->add_option("--mean-matches", sy_mean);
  sy->add_option("--seed", sy_seed);
  sy->add_option("--out", sy_out, "output directory")->required();
  sy->add_option("--shards", sy_shards, "number of pool shards");

  CLI11_PARSE(app, argc, argv);

  try {
    if (bm->parsed())
      return cmd_build_metadata(bm_unigrams, bm_bigrams, bm_titles, bm_synsets,
                                bm_budget, bm_unigram_min, bm_bigram_budget,
                                bm_out);
    if (m->parsed()) return cmd_match(m_metadata, m_in, m_out, m_counts, m_raw);
    if (rc->parsed()) return cmd_reduce_counts(rc_metadata, rc_shards, rc_out);
    if (sm->parsed()) return cmd_summarize(sm_counts, sm_t, sm_top);
    if (b->parsed()) return cmd_balance(b_counts, b_metadata, b_t, b_seed, b_in, b_out);
    if (p->parsed()) return cmd_plan(p_counts, p_matched, p_t);
    if (ls->parsed())
      return cmd_loader_sim(ls_counts, ls_in, ls_t, ls_seed, ls_epochs,
                            ls_prefix, ls_buffer);
    if (st->parsed()) {
      if (sc->parsed()) return cmd_stats_curve(sc_counts, sc_t, sc_out);
      if (str_->parsed()) return cmd_stats_tail_ratio(str_counts, str_t);
      if (ste->parsed()) return cmd_stats_estimate_t(ste_counts, ste_target);
    }
    if (r->parsed())
      return cmd_run(r_metadata, r_shards, r_t, r_seed, r_workdir, r_workers,
                     r_raw);
    if (sy->parsed())
      return cmd_synth(sy_entries, sy_records, sy_zipf, sy_mean, sy_seed,
                       sy_out, sy_shards);
  } catch (const std::exception& e) {
    std::cerr << "metacurate: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
