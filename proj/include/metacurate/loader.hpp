#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "metacurate/balancer.hpp"
#include "metacurate/common.hpp"
#include "metacurate/records.hpp"
#include "metacurate/rng.hpp"

namespace metacurate {

// Per-epoch streaming plan. Each epoch derives its own draw key, so
// head-entry records rotate between epochs while tail records always
// stream; the marginal keep probability of any record equals the
// offline one.
struct EpochPlan {
  std::uint64_t epoch_index = 0;
  std::uint64_t epoch_seed = 0;
  std::size_t shuffle_buffer = 65'536;

  static EpochPlan make(std::uint64_t master_seed, std::uint64_t epoch_index,
                        std::size_t shuffle_buffer = 65'536) {
    if (shuffle_buffer == 0)
      throw ConfigError("epoch plan: shuffle_buffer must be positive");
    return {epoch_index, rng::derive_epoch_seed(master_seed, epoch_index),
            shuffle_buffer};
  }
};

// Bounded streaming shuffle: hold up to `capacity` records; once full,
// each push evicts a uniformly chosen slot. Memory stays O(capacity)
// regardless of pool size.
template <typename T>
class ShuffleBuffer {
 public:
  ShuffleBuffer(std::size_t capacity, std::uint64_t seed,
                std::function<void(T&&)> sink)
      : capacity_(capacity), rng_(seed), sink_(std::move(sink)) {
    buf_.reserve(capacity);
  }

  void push(T&& item) {
    if (buf_.size() < capacity_) {
      buf_.push_back(std::move(item));
      return;
    }
    std::size_t slot = static_cast<std::size_t>(rng_.next_below(buf_.size()));
    sink_(std::move(buf_[slot]));
    buf_[slot] = std::move(item);
  }

  void flush() {
    // Fisher-Yates over the remainder.
    for (std::size_t i = buf_.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(rng_.next_below(i));
      std::swap(buf_[i - 1], buf_[j]);
    }
    for (auto& item : buf_) sink_(std::move(item));
    buf_.clear();
  }

 private:
  std::size_t capacity_;
  std::vector<T> buf_;
  rng::SplitMix64 rng_;
  std::function<void(T&&)> sink_;
};

struct EpochSummary {
  std::uint64_t epoch_index = 0;
  std::uint64_t records_in = 0;
  std::uint64_t records_kept = 0;
  std::uint64_t kept_with_tail = 0;  // kept records matching >= 1 tail entry
  std::uint64_t kept_head_only = 0;
};

// Online balancing inside the loader: re-apply the sampling part of the
// curation with the epoch's key, then pass kept records through a
// bounded shuffle. Requires pass-1 global counts (probs); refuses to
// stream without them.
inline EpochSummary stream_epoch(JsonlReader& pool,
                                 const EntryProbabilities& probs,
                                 const EpochPlan& plan,
                                 const std::function<void(Record&&)>& sink,
                                 const EntryCounts* counts = nullptr,
                                 std::uint64_t t = 0) {
  if (probs.size() == 0)
    throw ConfigError("stream_epoch: missing entry probabilities");
  CurationConfig cfg;
  cfg.master_seed = plan.epoch_seed;
  cfg.metadata_sha = probs.metadata_sha;
  EpochSummary sum;
  sum.epoch_index = plan.epoch_index;
  ShuffleBuffer<Record> shuffle(plan.shuffle_buffer, plan.epoch_seed ^ 0x5BLL,
                                [&](Record&& r) { sink(std::move(r)); });
  Record rec;
  while (pool.next(rec)) {
    ++sum.records_in;
    if (!keep_decision(rec, probs, cfg)) continue;
    ++sum.records_kept;
    if (counts && t >= 1) {
      bool has_tail = false;
      for (EntryId e : rec.matched_entry_ids) {
        if (e < counts->size() && counts->counts[e] <= t) {
          has_tail = true;
          break;
        }
      }
      if (has_tail)
        ++sum.kept_with_tail;
      else
        ++sum.kept_head_only;
    }
    shuffle.push(std::move(rec));
    rec = Record{};
  }
  shuffle.flush();
  return sum;
}

}  // namespace metacurate
