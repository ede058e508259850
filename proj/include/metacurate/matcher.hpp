#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "metacurate/common.hpp"
#include "metacurate/counting.hpp"
#include "metacurate/records.hpp"
#include "metacurate/unicode.hpp"

namespace metacurate {

enum class BoundaryMode {
  kWordBoundary,   // span edges must touch nothing or a non-alphanumeric scalar
  kRawSubstring,   // plain byte-level substring containment
};

struct MatchOptions {
  BoundaryMode boundary = BoundaryMode::kWordBoundary;
};

// Multi-pattern matcher over the full metadata surface list. Built once,
// immutable afterwards; queries share the automaton read-only across
// threads. Classic Aho-Corasick byte automaton: sparse sorted transition
// rows packed into one array, full 256-way table at the root, failure
// links resolved at query time, output links for suffix matches.
class MatchAutomaton {
 public:
  MatchAutomaton(std::span<const std::string> patterns, MatchOptions options)
      : options_(options) {
    if (patterns.empty())
      throw ConfigError("match automaton: empty pattern set");
    build(patterns);
  }

  std::size_t pattern_count() const { return pattern_len_.size(); }
  const MatchOptions& options() const { return options_; }

  // Approximate resident size of the automaton tables.
  std::size_t memory_bytes() const {
    return trans_.size() * sizeof(std::uint32_t) +
           row_begin_.size() * sizeof(std::uint32_t) +
           fail_.size() * sizeof(std::uint32_t) +
           out_link_.size() * sizeof(std::uint32_t) +
           entry_at_.size() * sizeof(std::uint32_t) +
           pattern_len_.size() * sizeof(std::uint32_t) + sizeof(root_row_);
  }

  // Deduplicated, ascending entry ids whose surface occurs in `text`
  // under the automaton's options. Allocates only the result vector.
  std::vector<EntryId> match(std::string_view text) const {
    std::vector<EntryId> out;
    match_into(text, out);
    return out;
  }

  void match_into(std::string_view text, std::vector<EntryId>& out) const {
    out.clear();
    std::uint32_t state = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
      unsigned char c = static_cast<unsigned char>(text[i]);
      state = step(state, c);
      if (has_output_[state]) collect(state, text, i + 1, out);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }

 private:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  std::uint32_t step(std::uint32_t state, unsigned char c) const {
    for (;;) {
      if (state == 0) return root_row_[c];
      std::uint32_t next = find(state, c);
      if (next != kNone) return next;
      state = fail_[state];
    }
  }

  // Binary search the sorted (byte, target) row of `state`.
  std::uint32_t find(std::uint32_t state, unsigned char c) const {
    std::uint32_t lo = row_begin_[state];
    std::uint32_t hi = row_begin_[state + 1];
    while (lo < hi) {
      std::uint32_t mid = (lo + hi) / 2;
      unsigned char key = static_cast<unsigned char>(trans_[mid] >> 24);
      if (key == c) return trans_[mid] & 0x00FFFFFFu;
      if (key < c)
        lo = mid + 1;
      else
        hi = mid;
    }
    return kNone;
  }

  // Every node on an out_link chain is terminal by construction.
  void collect(std::uint32_t state, std::string_view text, std::size_t end,
               std::vector<EntryId>& out) const {
    std::uint32_t s = (entry_at_[state] != kNone) ? state : out_link_[state];
    while (s != kNone) {
      EntryId entry = entry_at_[s];
      if (boundary_ok(text, end - pattern_len_[entry], end))
        out.push_back(entry);
      s = out_link_[s];
    }
  }

  bool boundary_ok(std::string_view text, std::size_t begin,
                   std::size_t end) const {
    if (options_.boundary == BoundaryMode::kRawSubstring) return true;
    if (begin > 0 &&
        unicode::is_word_char(unicode::decode_before(text, begin)))
      return false;
    if (end < text.size()) {
      std::size_t p = end;
      if (unicode::is_word_char(unicode::decode(text, p))) return false;
    }
    return true;
  }

  void build(std::span<const std::string> patterns) {
    struct BuildNode {
      std::uint32_t first_child = kNone;
      std::uint32_t next_sibling = kNone;
      unsigned char byte = 0;
      std::uint32_t entry = kNone;
    };
    std::vector<BuildNode> nodes(1);
    std::size_t total_len = 0;
    for (const auto& p : patterns) total_len += p.size();
    nodes.reserve(std::min<std::size_t>(total_len + 1, std::size_t{1} << 24));

    pattern_len_.resize(patterns.size());
    std::unordered_set<std::string_view> uniq;
    uniq.reserve(patterns.size());
    for (std::size_t pid = 0; pid < patterns.size(); ++pid) {
      const std::string& p = patterns[pid];
      if (p.empty())
        throw ConfigError("match automaton: empty pattern at id " +
                          std::to_string(pid));
      if (!uniq.insert(p).second)
        throw ConfigError("match automaton: duplicate pattern '" + p + "'");
      pattern_len_[pid] = static_cast<std::uint32_t>(p.size());
      std::uint32_t cur = 0;
      for (unsigned char c : p) {
        std::uint32_t child = nodes[cur].first_child;
        while (child != kNone && nodes[child].byte != c)
          child = nodes[child].next_sibling;
        if (child == kNone) {
          child = static_cast<std::uint32_t>(nodes.size());
          if (child >= (1u << 24))
            throw ConfigError("match automaton: pattern set too large");
          nodes.push_back({kNone, nodes[cur].first_child, c, kNone});
          nodes[cur].first_child = child;
        }
        cur = child;
      }
      nodes[cur].entry = static_cast<EntryId>(pid);
    }

    const std::uint32_t n = static_cast<std::uint32_t>(nodes.size());
    fail_.assign(n, 0);
    out_link_.assign(n, kNone);
    entry_at_.assign(n, kNone);
    for (std::uint32_t i = 0; i < n; ++i) entry_at_[i] = nodes[i].entry;

    // Flatten transitions: per-state sorted rows in one array,
    // full table for the root.
    row_begin_.assign(n + 1, 0);
    for (std::uint32_t i = 0; i < n; ++i) {
      std::uint32_t cnt = 0;
      for (std::uint32_t c = nodes[i].first_child; c != kNone;
           c = nodes[c].next_sibling)
        ++cnt;
      row_begin_[i + 1] = cnt;
    }
    for (std::uint32_t i = 0; i < n; ++i) row_begin_[i + 1] += row_begin_[i];
    trans_.assign(row_begin_[n], 0);
    {
      std::vector<std::uint32_t> cursor(row_begin_.begin(),
                                        row_begin_.end() - 1);
      for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t c = nodes[i].first_child; c != kNone;
             c = nodes[c].next_sibling) {
          trans_[cursor[i]++] =
              (static_cast<std::uint32_t>(nodes[c].byte) << 24) | c;
        }
        std::sort(trans_.begin() + row_begin_[i],
                  trans_.begin() + row_begin_[i + 1]);
      }
    }

    root_row_.fill(0);
    for (std::uint32_t t = row_begin_[0]; t < row_begin_[1]; ++t)
      root_row_[trans_[t] >> 24] = trans_[t] & 0x00FFFFFFu;

    // BFS failure and output links.
    std::deque<std::uint32_t> queue;
    for (unsigned c = 0; c < 256; ++c) {
      std::uint32_t s = root_row_[c];
      if (s != 0) {
        fail_[s] = 0;
        queue.push_back(s);
      }
    }
    while (!queue.empty()) {
      std::uint32_t r = queue.front();
      queue.pop_front();
      for (std::uint32_t t = row_begin_[r]; t < row_begin_[r + 1]; ++t) {
        unsigned char c = static_cast<unsigned char>(trans_[t] >> 24);
        std::uint32_t s = trans_[t] & 0x00FFFFFFu;
        std::uint32_t f = fail_[r];
        for (;;) {
          if (f == 0) {
            fail_[s] = root_row_[c];
            break;
          }
          std::uint32_t nxt = find(f, c);
          if (nxt != kNone) {
            fail_[s] = nxt;
            break;
          }
          f = fail_[f];
        }
        out_link_[s] = (entry_at_[fail_[s]] != kNone) ? fail_[s]
                                                      : out_link_[fail_[s]];
        queue.push_back(s);
      }
    }

    has_output_.assign(n, 0);
    for (std::uint32_t i = 0; i < n; ++i)
      has_output_[i] = (entry_at_[i] != kNone || out_link_[i] != kNone) ? 1 : 0;
  }

  MatchOptions options_;
  std::array<std::uint32_t, 256> root_row_{};
  std::vector<std::uint32_t> trans_;      // (byte << 24) | target
  std::vector<std::uint32_t> row_begin_;  // per-state row offsets, n+1
  std::vector<std::uint32_t> fail_;
  std::vector<std::uint32_t> out_link_;   // nearest terminal proper suffix
  std::vector<EntryId> entry_at_;         // entry ending at state, or kNone
  std::vector<std::uint32_t> pattern_len_;
  std::vector<unsigned char> has_output_;
};

struct ShardMatchSummary {
  std::uint64_t records_in = 0;
  std::uint64_t records_matched = 0;
  std::uint64_t records_skipped = 0;
};

// Optional record pre-filter (e.g. an external language-id predicate).
// Default accepts everything.
using RecordPredicate = bool (*)(const Record&);

// Matches every record of a shard, emitting only records with at least
// one match and accumulating shard-local counts (one per entry per
// record). Malformed input lines are skipped by the reader and reported
// in the summary.
inline ShardMatchSummary match_shard(const MatchAutomaton& automaton,
                                     JsonlReader& reader, JsonlWriter& writer,
                                     EntryCounts& counts,
                                     RecordPredicate accept = nullptr) {
  if (counts.size() != automaton.pattern_count())
    throw DataError("match_shard: counts length != pattern count");
  ShardMatchSummary sum;
  Record rec;
  while (reader.next(rec)) {
    ++sum.records_in;
    if (accept && !accept(rec)) continue;
    automaton.match_into(rec.text, rec.matched_entry_ids);
    if (rec.matched_entry_ids.empty()) continue;
    counts.add_record(rec.matched_entry_ids);
    rec.sync_matches_into_doc();
    writer.write(rec);
    ++sum.records_matched;
  }
  sum.records_skipped = reader.skipped();
  return sum;
}

}  // namespace metacurate
