#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "metacurate/common.hpp"
#include "metacurate/counting.hpp"

namespace metacurate {

struct CurvePoint {
  std::uint64_t rank = 0;  // 0 = tail end
  EntryId entry_id = 0;
  std::uint64_t count = 0;
  std::uint64_t cum_raw = 0;
  std::uint64_t cum_capped = 0;
};

// Tail-to-head cumulative counts: entries sorted by count ascending
// (ties by id), raw column accumulates count, capped column accumulates
// min(count, t). Zero-count entries sit at the front.
struct CurveSeries {
  std::vector<CurvePoint> points;
  std::uint64_t t = 0;
};

inline CurveSeries cumulative_curve(const EntryCounts& counts,
                                    std::uint64_t t) {
  if (t < 1) throw ConfigError("cumulative_curve: t must be >= 1");
  CurveSeries series;
  series.t = t;
  std::vector<EntryId> order(counts.counts.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](EntryId a, EntryId b) {
    if (counts.counts[a] != counts.counts[b])
      return counts.counts[a] < counts.counts[b];
    return a < b;
  });
  series.points.reserve(order.size());
  std::uint64_t cum_raw = 0, cum_capped = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    EntryId id = order[rank];
    std::uint64_t c = counts.counts[id];
    cum_raw += c;
    cum_capped += std::min(c, t);
    series.points.push_back({rank, id, c, cum_raw, cum_capped});
  }
  return series;
}

// Fraction of total match counts contributed by tail entries
// (count <= t, inclusive — the complement of Table-2-style "> t" heads).
inline double tail_ratio(const EntryCounts& counts, std::uint64_t t) {
  if (t < 1) throw ConfigError("tail_ratio: t must be >= 1");
  if (counts.total == 0) throw DataError("tail_ratio: zero total count");
  std::uint64_t tail = 0;
  for (auto c : counts.counts)
    if (c <= t) tail += c;
  return static_cast<double>(tail) / static_cast<double>(counts.total);
}

// Smallest t whose tail ratio reaches the target. tail_ratio is
// nondecreasing in t, so a plain binary search over [1, max count]
// applies. Transfers a curation regime across pools of different sizes
// (e.g. pick the t on a new pool that reproduces a reference pool's
// tail share).
inline std::uint64_t estimate_t_for_tail_ratio(const EntryCounts& counts,
                                               double target_ratio) {
  if (!(target_ratio > 0.0) || !(target_ratio < 1.0))
    throw ConfigError("estimate_t_for_tail_ratio: target must be in (0, 1)");
  if (counts.total == 0)
    throw DataError("estimate_t_for_tail_ratio: zero total count");
  std::uint64_t max_count = *std::max_element(counts.counts.begin(),
                                              counts.counts.end());
  if (max_count == 0)
    throw DataError("estimate_t_for_tail_ratio: all counts zero");
  std::uint64_t lo = 1, hi = max_count;
  while (lo < hi) {
    std::uint64_t mid = lo + (hi - lo) / 2;
    if (tail_ratio(counts, mid) >= target_ratio)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

inline void write_curve_csv(const std::string& path,
                            const CurveSeries& series) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write curve: " + path);
  out << "rank,entry_id,count,cum_raw,cum_capped\n";
  for (const auto& p : series.points) {
    out << p.rank << ',' << p.entry_id << ',' << p.count << ',' << p.cum_raw
        << ',' << p.cum_capped << '\n';
  }
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace metacurate
