#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "metacurate/common.hpp"
#include "metacurate/records.hpp"
#include "metacurate/rng.hpp"

namespace metacurate {

// Zipf-distributed stand-in for a CommonCrawl pool. Entry tokens are
// fixed-width and share no substring containment with each other or
// with the noise vocabulary, so WordBoundary and RawSubstring matching
// agree on synthetic text — balancing tests stay independent of matcher
// semantics.
struct SynthSpec {
  std::uint32_t n_entries = 5'000;
  std::uint64_t n_records = 100'000;
  double zipf_exponent = 1.0;
  double mean_matches_per_record = 3.5;
  std::uint64_t seed = 0;
};

class SynthPool {
 public:
  explicit SynthPool(const SynthSpec& spec) : spec_(spec) {
    if (spec.n_entries < 1 || spec.n_entries > 9'999'999)
      throw ConfigError("synth: n_entries out of range");
    if (spec.n_records < 1) throw ConfigError("synth: n_records must be >= 1");
    if (spec.mean_matches_per_record <= 0.0)
      throw ConfigError("synth: mean matches must be positive");
    cum_.resize(spec.n_entries);
    double acc = 0.0;
    for (std::uint32_t i = 0; i < spec.n_entries; ++i) {
      acc += std::pow(static_cast<double>(i + 1), -spec.zipf_exponent);
      cum_[i] = acc;
    }
    for (auto& c : cum_) c /= acc;
    cum_.back() = 1.0;
  }

  const SynthSpec& spec() const { return spec_; }

  static std::string entry_surface(EntryId id) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "w%07u", id);
    return buf;
  }

  static std::string noise_surface(std::uint64_t id) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "n%07llu",
                  static_cast<unsigned long long>(id));
    return buf;
  }

  static std::string uid_for(std::uint64_t index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "r%09llu",
                  static_cast<unsigned long long>(index));
    return buf;
  }

  std::vector<std::string> metadata() const {
    std::vector<std::string> m;
    m.reserve(spec_.n_entries);
    for (std::uint32_t i = 0; i < spec_.n_entries; ++i)
      m.push_back(entry_surface(i));
    return m;
  }

  struct Draws {
    std::vector<EntryId> token_draws;  // raw iid Zipf draws, with duplicates
    std::vector<EntryId> matched;      // sorted unique ground truth
  };

  // Entry draws for one record. Records are generated independently by
  // index (counter-keyed stream), so sharding by record range never
  // changes content.
  Draws draws(std::uint64_t index) const {
    rng::SplitMix64 stream(record_key(index));
    Draws d;
    std::uint64_t k = poisson(stream, spec_.mean_matches_per_record);
    d.token_draws.reserve(k);
    for (std::uint64_t i = 0; i < k; ++i)
      d.token_draws.push_back(sample_zipf(stream.next_double()));
    d.matched = d.token_draws;
    std::sort(d.matched.begin(), d.matched.end());
    d.matched.erase(std::unique(d.matched.begin(), d.matched.end()),
                    d.matched.end());
    return d;
  }

  std::vector<EntryId> matched_ids(std::uint64_t index) const {
    return draws(index).matched;
  }

  Record record(std::uint64_t index) const {
    rng::SplitMix64 stream(record_key(index));
    std::vector<std::string> tokens;
    std::uint64_t k = poisson(stream, spec_.mean_matches_per_record);
    std::vector<EntryId> matched;
    matched.reserve(k);
    for (std::uint64_t i = 0; i < k; ++i) {
      EntryId e = sample_zipf(stream.next_double());
      matched.push_back(e);
      tokens.push_back(entry_surface(e));
    }
    std::uint64_t noise = poisson(stream, kNoiseMean);
    if (k == 0 && noise == 0) noise = 1;
    for (std::uint64_t i = 0; i < noise; ++i)
      tokens.push_back(noise_surface(stream.next_below(10'000'000)));
    for (std::size_t i = tokens.size(); i > 1; --i)
      std::swap(tokens[i - 1], tokens[stream.next_below(i)]);

    Record rec;
    rec.uid = uid_for(index);
    rec.text.reserve(tokens.size() * 9);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i) rec.text.push_back(' ');
      rec.text += tokens[i];
    }
    std::sort(matched.begin(), matched.end());
    matched.erase(std::unique(matched.begin(), matched.end()), matched.end());
    rec.matched_entry_ids = std::move(matched);
    rec.doc = {{"uid", rec.uid}, {"text", rec.text}};
    return rec;
  }

 private:
  static constexpr double kNoiseMean = 1.5;

  std::uint64_t record_key(std::uint64_t index) const {
    return rng::mix64(spec_.seed ^ rng::mix64(index ^ 0x517CC1B727220A95ULL));
  }

  EntryId sample_zipf(double u) const {
    auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
    if (it == cum_.end()) --it;
    return static_cast<EntryId>(it - cum_.begin());
  }

  // Knuth's product-of-uniforms method; exact and portable.
  static std::uint64_t poisson(rng::SplitMix64& stream, double lambda) {
    double limit = std::exp(-lambda);
    std::uint64_t k = 0;
    double p = 1.0;
    for (;;) {
      p *= stream.next_double();
      if (p <= limit) return k;
      ++k;
    }
  }

  SynthSpec spec_;
  std::vector<double> cum_;
};

struct GeneratedPool {
  std::filesystem::path metadata_path;
  std::filesystem::path truth_path;
  std::vector<std::filesystem::path> shard_paths;
  std::uint64_t records = 0;
  std::uint64_t matched_records = 0;
  double realized_mean_matches = 0.0;  // over records with >= 1 match
};

// Writes metadata, shard JSONL files, and a ground-truth sidecar
// (uid -> matched entry ids) under out_dir.
inline GeneratedPool generate_pool(const SynthSpec& spec,
                                   const std::filesystem::path& out_dir,
                                   std::uint32_t n_shards = 1) {
  if (n_shards < 1) throw ConfigError("synth: n_shards must be >= 1");
  std::filesystem::create_directories(out_dir);
  SynthPool pool(spec);

  GeneratedPool gen;
  gen.metadata_path = out_dir / "metadata.txt";
  {
    std::ofstream out(gen.metadata_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + gen.metadata_path.string());
    for (const auto& s : pool.metadata()) out << s << '\n';
  }

  gen.truth_path = out_dir / "truth.jsonl";
  std::ofstream truth(gen.truth_path, std::ios::binary | std::ios::trunc);
  if (!truth) throw IoError("cannot write " + gen.truth_path.string());

  std::uint64_t total_matches = 0;
  std::uint64_t per_shard = (spec.n_records + n_shards - 1) / n_shards;
  std::uint64_t index = 0;
  for (std::uint32_t s = 0; s < n_shards && index < spec.n_records; ++s) {
    char name[32];
    std::snprintf(name, sizeof(name), "shard_%04u.jsonl", s);
    auto path = out_dir / name;
    JsonlWriter writer(path.string());
    for (std::uint64_t i = 0; i < per_shard && index < spec.n_records;
         ++i, ++index) {
      Record rec = pool.record(index);
      if (!rec.matched_entry_ids.empty()) {
        ++gen.matched_records;
        total_matches += rec.matched_entry_ids.size();
        nlohmann::ordered_json t = {{"uid", rec.uid},
                                    {"matched_entry_ids", rec.matched_entry_ids}};
        truth << t.dump() << '\n';
      }
      writer.write(rec);
    }
    writer.close();
    gen.shard_paths.push_back(path);
  }
  gen.records = index;
  gen.realized_mean_matches =
      gen.matched_records == 0
          ? 0.0
          : static_cast<double>(total_matches) /
                static_cast<double>(gen.matched_records);
  return gen;
}

}  // namespace metacurate
