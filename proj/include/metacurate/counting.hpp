#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "metacurate/common.hpp"

namespace metacurate {

// Global (or shard-local) match counts, dense over entry ids. The
// replacement for an inverted index: balancing needs nothing but these
// totals.
struct EntryCounts {
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  static EntryCounts zeros(std::size_t n) {
    EntryCounts ec;
    ec.counts.assign(n, 0);
    return ec;
  }

  std::size_t size() const { return counts.size(); }

  void add_record(std::span<const EntryId> matched) {
    for (EntryId e : matched) {
      if (e >= counts.size())
        throw DataError("entry id out of range: " + std::to_string(e));
      ++counts[e];
      ++total;
    }
  }

  std::uint64_t recompute_total() const {
    std::uint64_t t = 0;
    for (auto c : counts) t += c;
    return t;
  }
};

inline EntryCounts merge_counts(std::span<const EntryCounts> shards) {
  if (shards.empty()) throw ConfigError("merge_counts: no shards");
  EntryCounts out = EntryCounts::zeros(shards.front().size());
  for (const auto& s : shards) {
    if (s.size() != out.size())
      throw DataError("merge_counts: shard count length " +
                      std::to_string(s.size()) + " != " +
                      std::to_string(out.size()) +
                      " (metadata version mismatch?)");
    for (std::size_t i = 0; i < s.counts.size(); ++i) out.counts[i] += s.counts[i];
    out.total += s.total;
  }
  return out;
}

struct CountsSummary {
  std::uint64_t zero_entries = 0;
  std::uint64_t above_t_entries = 0;
  std::uint64_t above_t_total = 0;
  double share_above_t = 0.0;
  std::vector<std::pair<EntryId, std::uint64_t>> top;  // by count desc
};

inline CountsSummary summarize(const EntryCounts& counts, std::uint64_t t,
                               std::size_t top_k = 20) {
  if (t < 1) throw ConfigError("summarize: t must be >= 1");
  CountsSummary s;
  for (std::size_t i = 0; i < counts.counts.size(); ++i) {
    std::uint64_t c = counts.counts[i];
    if (c == 0) ++s.zero_entries;
    if (c > t) {
      ++s.above_t_entries;
      s.above_t_total += c;
    }
  }
  s.share_above_t =
      counts.total == 0
          ? 0.0
          : static_cast<double>(s.above_t_total) / static_cast<double>(counts.total);
  std::vector<std::pair<EntryId, std::uint64_t>> order;
  order.reserve(counts.counts.size());
  for (std::size_t i = 0; i < counts.counts.size(); ++i)
    if (counts.counts[i] > 0)
      order.emplace_back(static_cast<EntryId>(i), counts.counts[i]);
  std::size_t k = std::min(top_k, order.size());
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [](const auto& a, const auto& b) {
                      if (a.second != b.second) return a.second > b.second;
                      return a.first < b.first;
                    });
  order.resize(k);
  s.top = std::move(order);
  return s;
}

// --- counts file format ----------------------------------------------------
//
//   # metadata_sha256=<hex> total=<int> entries=<int>
//   entry_id,count
//   <id>,<count>            (zero rows omitted)
//
// Entry ids are positional against the metadata file, so the digest makes
// mismatched metadata/counts pairs fail fast, and `entries` lets the
// loader materialize the omitted zero rows.

struct LoadedCounts {
  EntryCounts counts;
  std::string metadata_sha;
};

inline void write_counts_csv(const std::string& path, const EntryCounts& counts,
                             const std::string& metadata_sha) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write counts: " + path);
  out << "# metadata_sha256=" << metadata_sha << " total=" << counts.total
      << " entries=" << counts.counts.size() << "\n";
  out << "entry_id,count\n";
  for (std::size_t i = 0; i < counts.counts.size(); ++i) {
    if (counts.counts[i] != 0) out << i << ',' << counts.counts[i] << '\n';
  }
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

inline LoadedCounts load_counts_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open counts: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw DataError(path + ": missing counts header comment");
  LoadedCounts lc;
  std::uint64_t declared_total = 0;
  std::uint64_t declared_entries = 0;
  bool have_total = false, have_entries = false;
  {
    std::istringstream hs(line.substr(2));
    std::string kv;
    while (hs >> kv) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) continue;
      std::string key = kv.substr(0, eq);
      std::string val = kv.substr(eq + 1);
      if (key == "metadata_sha256") {
        lc.metadata_sha = val;
      } else if (key == "total") {
        declared_total = std::stoull(val);
        have_total = true;
      } else if (key == "entries") {
        declared_entries = std::stoull(val);
        have_entries = true;
      }
    }
  }
  if (lc.metadata_sha.empty() || !have_total || !have_entries)
    throw DataError(path + ": counts header must carry metadata_sha256, total, entries");
  lc.counts = EntryCounts::zeros(declared_entries);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line == "entry_id,count") continue;
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected id,count");
    std::uint64_t id = 0, cnt = 0;
    try {
      id = std::stoull(line.substr(0, comma));
      cnt = std::stoull(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw DataError(path + ":" + std::to_string(lineno) + ": bad row '" + line + "'");
    }
    if (id >= declared_entries)
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": entry id " + std::to_string(id) + " out of range");
    if (lc.counts.counts[id] != 0)
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": duplicate entry id " + std::to_string(id));
    lc.counts.counts[id] = cnt;
    lc.counts.total += cnt;
  }
  if (lc.counts.total != declared_total)
    throw DataError(path + ": declared total " + std::to_string(declared_total) +
                    " != sum of rows " + std::to_string(lc.counts.total));
  return lc;
}

}  // namespace metacurate
