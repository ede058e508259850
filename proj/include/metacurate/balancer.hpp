#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "metacurate/common.hpp"
#include "metacurate/counting.hpp"
#include "metacurate/records.hpp"
#include "metacurate/rng.hpp"

namespace metacurate {

struct CurationConfig {
  std::uint64_t t = 20'000;
  std::uint64_t master_seed = 0;
  std::string metadata_sha;
};

// Per-entry sampling probabilities: 1.0 for tail entries (count <= t),
// t/count for head entries. Zero-count entries clamp to 1.0, which is
// vacuous since no record references them.
struct EntryProbabilities {
  std::vector<double> probs;
  std::string metadata_sha;

  std::size_t size() const { return probs.size(); }
};

inline EntryProbabilities compute_probabilities(const EntryCounts& counts,
                                                std::uint64_t t,
                                                std::string metadata_sha = {}) {
  if (t < 1) throw ConfigError("compute_probabilities: t must be >= 1");
  EntryProbabilities ep;
  ep.metadata_sha = std::move(metadata_sha);
  ep.probs.resize(counts.counts.size());
  for (std::size_t i = 0; i < counts.counts.size(); ++i) {
    std::uint64_t c = counts.counts[i];
    ep.probs[i] = (c <= t) ? 1.0
                           : static_cast<double>(t) / static_cast<double>(c);
  }
  return ep;
}

// One Bernoulli draw per matched entry, ascending id order, keep on the
// first success. Each draw is keyed by (master_seed, uid, entry_id), so
// the decision is a pure function of the record and the config — stable
// under any sharding or worker count. Keep probability of the record is
// 1 - prod(1 - p_e).
inline bool keep_decision(std::string_view uid,
                          std::span<const EntryId> matched_entry_ids,
                          const EntryProbabilities& probs,
                          const CurationConfig& config) {
  for (EntryId e : matched_entry_ids) {
    if (e >= probs.size())
      throw DataError("keep_decision: entry id " + std::to_string(e) +
                      " out of range");
    if (rng::keyed_uniform(config.master_seed, uid, e) < probs.probs[e])
      return true;
  }
  return false;
}

inline bool keep_decision(const Record& rec, const EntryProbabilities& probs,
                          const CurationConfig& config) {
  return keep_decision(rec.uid, rec.matched_entry_ids, probs, config);
}

struct CurateSummary {
  std::uint64_t records_in = 0;
  std::uint64_t records_kept = 0;

  double keep_rate() const {
    return records_in == 0
               ? 0.0
               : static_cast<double>(records_kept) / static_cast<double>(records_in);
  }
};

// Streams a matched shard through keep_decision, preserving input order.
// Probabilities must come from the global merged counts; the digest
// check enforces that probs and config agree on the metadata version.
inline CurateSummary curate_shard(JsonlReader& reader, JsonlWriter& writer,
                                  const EntryProbabilities& probs,
                                  const CurationConfig& config) {
  if (!probs.metadata_sha.empty() && !config.metadata_sha.empty() &&
      probs.metadata_sha != config.metadata_sha)
    throw ConfigError("curate_shard: probabilities digest " +
                      probs.metadata_sha + " != config digest " +
                      config.metadata_sha);
  CurateSummary sum;
  Record rec;
  while (reader.next(rec)) {
    ++sum.records_in;
    if (keep_decision(rec, probs, config)) {
      writer.write(rec);
      ++sum.records_kept;
    }
  }
  return sum;
}

// Expected curated size of a pool under `probs`:
// sum over records of 1 - prod(1 - p_e). A planning tool for choosing t
// before committing a full pass-2 run.
class ExpectedSizeAccumulator {
 public:
  explicit ExpectedSizeAccumulator(const EntryProbabilities& probs)
      : probs_(probs) {}

  void add(std::span<const EntryId> matched_entry_ids) {
    double miss = 1.0;
    for (EntryId e : matched_entry_ids) {
      if (e >= probs_.size())
        throw DataError("expected_curated_size: entry id " +
                        std::to_string(e) + " out of range");
      miss *= 1.0 - probs_.probs[e];
    }
    expected_ += 1.0 - miss;
    ++records_;
  }

  double expected() const { return expected_; }
  std::uint64_t records() const { return records_; }

 private:
  const EntryProbabilities& probs_;
  double expected_ = 0.0;
  std::uint64_t records_ = 0;
};

inline double expected_curated_size(JsonlReader& reader,
                                    const EntryProbabilities& probs) {
  ExpectedSizeAccumulator acc(probs);
  Record rec;
  while (reader.next(rec)) acc.add(rec.matched_entry_ids);
  return acc.expected();
}

}  // namespace metacurate
