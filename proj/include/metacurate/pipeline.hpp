#pragma once

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "metacurate/balancer.hpp"
#include "metacurate/common.hpp"
#include "metacurate/counting.hpp"
#include "metacurate/digest.hpp"
#include "metacurate/matcher.hpp"
#include "metacurate/metadata.hpp"
#include "metacurate/records.hpp"

namespace metacurate {

struct PipelineConfig {
  std::string metadata_path;
  std::vector<std::string> shard_paths;
  std::uint64_t t = 20'000;
  std::uint64_t seed = 0;
  std::filesystem::path workdir;
  std::size_t workers = 1;
  MatchOptions match_options;
};

struct ShardStatus {
  std::string input;
  std::string matched_path;  // relative to workdir
  std::string counts_path;
  std::string curated_path;
  std::string matched_sha;
  std::string counts_sha;
  std::string curated_sha;
  std::uint64_t records_in = 0;
  std::uint64_t records_matched = 0;
  std::uint64_t records_skipped = 0;
  std::uint64_t records_curated = 0;
  bool matched_done = false;
  bool curated_done = false;
  std::string error;
};

struct PipelineManifest {
  std::string metadata_path;
  std::string metadata_sha;
  std::uint64_t t = 0;
  std::uint64_t seed = 0;
  std::string boundary_mode;
  std::string counts_path;
  std::vector<ShardStatus> shards;

  std::uint64_t total_in = 0;
  std::uint64_t total_matched = 0;
  std::uint64_t total_skipped = 0;
  std::uint64_t total_curated = 0;
  double match_rate = 0.0;
  double balance_rate = 0.0;
  double overall_rate = 0.0;

  bool ok() const {
    for (const auto& s : shards)
      if (!s.matched_done || !s.curated_done) return false;
    return true;
  }
};

namespace detail {

inline nlohmann::json manifest_to_json(const PipelineManifest& m) {
  nlohmann::json j;
  j["metadata_path"] = m.metadata_path;
  j["metadata_sha256"] = m.metadata_sha;
  j["config"] = {{"t", m.t},
                 {"seed", m.seed},
                 {"boundary_mode", m.boundary_mode}};
  j["counts_path"] = m.counts_path;
  j["funnel"] = {{"records_in", m.total_in},
                 {"records_matched", m.total_matched},
                 {"records_skipped", m.total_skipped},
                 {"records_curated", m.total_curated},
                 {"match_rate", m.match_rate},
                 {"balance_rate", m.balance_rate},
                 {"overall_rate", m.overall_rate}};
  j["shards"] = nlohmann::json::array();
  for (const auto& s : m.shards) {
    j["shards"].push_back({{"input", s.input},
                           {"matched_path", s.matched_path},
                           {"counts_path", s.counts_path},
                           {"curated_path", s.curated_path},
                           {"matched_sha256", s.matched_sha},
                           {"counts_sha256", s.counts_sha},
                           {"curated_sha256", s.curated_sha},
                           {"records_in", s.records_in},
                           {"records_matched", s.records_matched},
                           {"records_skipped", s.records_skipped},
                           {"records_curated", s.records_curated},
                           {"matched_done", s.matched_done},
                           {"curated_done", s.curated_done},
                           {"error", s.error}});
  }
  return j;
}

inline PipelineManifest manifest_from_json(const nlohmann::json& j) {
  PipelineManifest m;
  m.metadata_path = j.value("metadata_path", "");
  m.metadata_sha = j.value("metadata_sha256", "");
  if (j.contains("config")) {
    m.t = j["config"].value("t", std::uint64_t{0});
    m.seed = j["config"].value("seed", std::uint64_t{0});
    m.boundary_mode = j["config"].value("boundary_mode", "");
  }
  m.counts_path = j.value("counts_path", "");
  if (j.contains("funnel")) {
    const auto& f = j["funnel"];
    m.total_in = f.value("records_in", std::uint64_t{0});
    m.total_matched = f.value("records_matched", std::uint64_t{0});
    m.total_skipped = f.value("records_skipped", std::uint64_t{0});
    m.total_curated = f.value("records_curated", std::uint64_t{0});
    m.match_rate = f.value("match_rate", 0.0);
    m.balance_rate = f.value("balance_rate", 0.0);
    m.overall_rate = f.value("overall_rate", 0.0);
  }
  for (const auto& sj : j.value("shards", nlohmann::json::array())) {
    ShardStatus s;
    s.input = sj.value("input", "");
    s.matched_path = sj.value("matched_path", "");
    s.counts_path = sj.value("counts_path", "");
    s.curated_path = sj.value("curated_path", "");
    s.matched_sha = sj.value("matched_sha256", "");
    s.counts_sha = sj.value("counts_sha256", "");
    s.curated_sha = sj.value("curated_sha256", "");
    s.records_in = sj.value("records_in", std::uint64_t{0});
    s.records_matched = sj.value("records_matched", std::uint64_t{0});
    s.records_skipped = sj.value("records_skipped", std::uint64_t{0});
    s.records_curated = sj.value("records_curated", std::uint64_t{0});
    s.matched_done = sj.value("matched_done", false);
    s.curated_done = sj.value("curated_done", false);
    s.error = sj.value("error", "");
    m.shards.push_back(std::move(s));
  }
  return m;
}

// An output is reusable only if it exists and still hashes to what the
// manifest recorded; partial writes and manual edits both invalidate.
inline bool output_intact(const std::filesystem::path& path,
                          const std::string& recorded_sha) {
  if (recorded_sha.empty()) return false;
  std::error_code ec;
  if (!std::filesystem::exists(path, ec) || ec) return false;
  try {
    return sha256_file(path.string()) == recorded_sha;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace detail

inline void save_manifest(const std::filesystem::path& path,
                          const PipelineManifest& m) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write manifest: " + tmp.string());
    out << detail::manifest_to_json(m).dump(2) << '\n';
    out.flush();
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline PipelineManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded())
    throw DataError("manifest is not valid JSON: " + path.string());
  return detail::manifest_from_json(j);
}

// Two-pass curation over a shard list: match + count every shard, merge
// counts globally, then balance every shard against the merged counts.
// Matching runs before anything expensive downstream would; pass 2 can
// rerun with a new t or seed without re-matching. Re-runs skip shards
// whose outputs still match their recorded digests. Shard-level worker
// parallelism never changes output bytes because all sampling is keyed.
inline PipelineManifest run_pipeline(const PipelineConfig& config) {
  if (config.shard_paths.empty())
    throw ConfigError("run_pipeline: no input shards");
  if (config.t < 1) throw ConfigError("run_pipeline: t must be >= 1");
  const std::size_t workers = std::max<std::size_t>(1, config.workers);

  std::filesystem::create_directories(config.workdir / "shards");
  const auto manifest_path = config.workdir / "manifest.json";

  const auto surfaces = load_metadata(config.metadata_path);
  const std::string metadata_sha = sha256_file(config.metadata_path);
  const char* boundary =
      config.match_options.boundary == BoundaryMode::kWordBoundary
          ? "word_boundary"
          : "raw_substring";

  PipelineManifest manifest;
  manifest.metadata_path = config.metadata_path;
  manifest.metadata_sha = metadata_sha;
  manifest.t = config.t;
  manifest.seed = config.seed;
  manifest.boundary_mode = boundary;
  manifest.counts_path = "counts.csv";
  manifest.shards.resize(config.shard_paths.size());

  // Prior manifest: pass-1 results survive a t/seed change, pass-2
  // results only a byte-identical config.
  PipelineManifest prior;
  bool have_prior = false;
  bool prior_pass1_valid = false;
  bool prior_pass2_valid = false;
  if (std::filesystem::exists(manifest_path)) {
    try {
      prior = load_manifest(manifest_path);
      have_prior = prior.shards.size() == config.shard_paths.size();
      if (have_prior) {
        prior_pass1_valid = prior.metadata_sha == metadata_sha &&
                            prior.boundary_mode == boundary;
        prior_pass2_valid = prior_pass1_valid && prior.t == config.t &&
                            prior.seed == config.seed;
      }
    } catch (const Error&) {
      have_prior = false;
    }
  }

  for (std::size_t i = 0; i < config.shard_paths.size(); ++i) {
    auto& s = manifest.shards[i];
    s.input = config.shard_paths[i];
    char stem[32];
    std::snprintf(stem, sizeof(stem), "shards/%04zu", i);
    s.matched_path = std::string(stem) + ".matched.jsonl";
    s.counts_path = std::string(stem) + ".counts.csv";
    s.curated_path = std::string(stem) + ".curated.jsonl";
    if (have_prior && prior.shards[i].input == s.input) {
      const auto& p = prior.shards[i];
      if (prior_pass1_valid && p.matched_done &&
          detail::output_intact(config.workdir / s.matched_path, p.matched_sha) &&
          detail::output_intact(config.workdir / s.counts_path, p.counts_sha)) {
        s.matched_sha = p.matched_sha;
        s.counts_sha = p.counts_sha;
        s.records_in = p.records_in;
        s.records_matched = p.records_matched;
        s.records_skipped = p.records_skipped;
        s.matched_done = true;
      }
      if (prior_pass2_valid && s.matched_done && p.curated_done &&
          detail::output_intact(config.workdir / s.curated_path, p.curated_sha)) {
        s.curated_sha = p.curated_sha;
        s.records_curated = p.records_curated;
        s.curated_done = true;
      }
    }
  }

  MatchAutomaton automaton(surfaces, config.match_options);

  // Pass 1: match + shard-local counts.
  {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= manifest.shards.size()) return;
        auto& s = manifest.shards[i];
        if (s.matched_done) continue;
        try {
          JsonlReader reader(s.input);
          JsonlWriter writer((config.workdir / s.matched_path).string());
          EntryCounts counts = EntryCounts::zeros(surfaces.size());
          auto sum = match_shard(automaton, reader, writer, counts);
          writer.close();
          write_counts_csv((config.workdir / s.counts_path).string(), counts,
                           metadata_sha);
          s.records_in = sum.records_in;
          s.records_matched = sum.records_matched;
          s.records_skipped = sum.records_skipped;
          s.matched_sha =
              sha256_file((config.workdir / s.matched_path).string());
          s.counts_sha = sha256_file((config.workdir / s.counts_path).string());
          s.matched_done = true;
          s.error.clear();
        } catch (const std::exception& e) {
          s.matched_done = false;
          s.error = e.what();
        }
      }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  bool pass1_complete = true;
  for (const auto& s : manifest.shards)
    if (!s.matched_done) pass1_complete = false;

  // Barrier: balancing needs every shard's counts merged first.
  EntryProbabilities probs;
  if (pass1_complete) {
    std::vector<EntryCounts> shard_counts;
    shard_counts.reserve(manifest.shards.size());
    for (const auto& s : manifest.shards) {
      auto lc = load_counts_csv((config.workdir / s.counts_path).string());
      if (lc.metadata_sha != metadata_sha)
        throw DataError("shard counts digest mismatch: " + s.counts_path);
      shard_counts.push_back(std::move(lc.counts));
    }
    EntryCounts global = merge_counts(shard_counts);
    write_counts_csv((config.workdir / manifest.counts_path).string(), global,
                     metadata_sha);
    probs = compute_probabilities(global, config.t, metadata_sha);
  }

  // Pass 2: balance against the global counts.
  if (pass1_complete) {
    CurationConfig ccfg{config.t, config.seed, metadata_sha};
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= manifest.shards.size()) return;
        auto& s = manifest.shards[i];
        if (s.curated_done) continue;
        try {
          JsonlReader reader((config.workdir / s.matched_path).string(),
                             /*want_matches=*/true);
          JsonlWriter writer((config.workdir / s.curated_path).string());
          auto sum = curate_shard(reader, writer, probs, ccfg);
          writer.close();
          s.records_curated = sum.records_kept;
          s.curated_sha =
              sha256_file((config.workdir / s.curated_path).string());
          s.curated_done = true;
          s.error.clear();
        } catch (const std::exception& e) {
          s.curated_done = false;
          s.error = e.what();
        }
      }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (const auto& s : manifest.shards) {
    manifest.total_in += s.records_in;
    manifest.total_matched += s.records_matched;
    manifest.total_skipped += s.records_skipped;
    manifest.total_curated += s.records_curated;
  }
  if (manifest.total_in > 0)
    manifest.match_rate = static_cast<double>(manifest.total_matched) /
                          static_cast<double>(manifest.total_in);
  if (manifest.total_matched > 0)
    manifest.balance_rate = static_cast<double>(manifest.total_curated) /
                            static_cast<double>(manifest.total_matched);
  if (manifest.total_in > 0)
    manifest.overall_rate = static_cast<double>(manifest.total_curated) /
                            static_cast<double>(manifest.total_in);

  save_manifest(manifest_path, manifest);
  return manifest;
}

}  // namespace metacurate
