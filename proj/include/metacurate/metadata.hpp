#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "metacurate/common.hpp"

namespace metacurate {

enum class SourceKind : int {
  kWordNetSynsets = 0,
  kWikiUnigrams = 1,
  kWikiBigrams = 2,
  kWikiTitles = 3,
};

inline const char* source_kind_name(SourceKind k) {
  switch (k) {
    case SourceKind::kWordNetSynsets: return "wordnet_synsets";
    case SourceKind::kWikiUnigrams: return "wiki_unigrams";
    case SourceKind::kWikiBigrams: return "wiki_bigrams";
    case SourceKind::kWikiTitles: return "wiki_titles";
  }
  return "?";
}

// One wordlist source. The statistic column means: occurrence count for
// unigrams, PMI score for bigrams, view frequency for titles; unused for
// synsets (always admitted).
struct LexiconItem {
  std::string surface;
  double statistic = 0.0;
};

struct SourceLexicon {
  SourceKind kind;
  std::vector<LexiconItem> items;
};

struct MetadataEntry {
  EntryId id = 0;
  std::string surface;
  SourceKind source = SourceKind::kWordNetSynsets;
};

struct BudgetPlan {
  std::uint64_t total_budget = 500'000;
  std::uint64_t unigram_count_threshold = 100;
  std::uint64_t bigram_budget = 100'000;
};

// Per-component admission counts plus the thresholds the build induced.
struct BuildReport {
  std::uint64_t synsets = 0;
  std::uint64_t unigrams = 0;
  std::uint64_t bigrams = 0;
  std::uint64_t titles = 0;
  std::uint64_t total = 0;
  double pmi_threshold = 0.0;
  std::optional<double> title_view_threshold;
  BudgetPlan plan;
};

// Pointwise mutual information of a bigram xy:
// log2(N * c(xy) / (c(x) * c(y))).
inline double pmi(std::int64_t bigram_count, std::int64_t left_count,
                  std::int64_t right_count, std::int64_t corpus_tokens) {
  if (bigram_count < 1 || left_count < 1 || right_count < 1)
    throw ConfigError("pmi: counts must be >= 1");
  if (corpus_tokens < bigram_count || corpus_tokens < left_count ||
      corpus_tokens < right_count)
    throw ConfigError("pmi: corpus_tokens must be >= every count");
  return std::log2(static_cast<double>(corpus_tokens) *
                   static_cast<double>(bigram_count) /
                   (static_cast<double>(left_count) *
                    static_cast<double>(right_count)));
}

namespace detail {

// Descending statistic, ties by surface ascending. The canonical
// admission order for every thresholded component.
inline void sort_by_statistic(std::vector<LexiconItem>& items) {
  std::sort(items.begin(), items.end(),
            [](const LexiconItem& a, const LexiconItem& b) {
              if (a.statistic != b.statistic) return a.statistic > b.statistic;
              return a.surface < b.surface;
            });
}

}  // namespace detail

// The PMI cutoff that fills the bigram budget: the score of the
// budget-th item in descending order. All items tied at the cutoff are
// admitted, so the admitted count can exceed the budget at the boundary.
inline double estimate_pmi_threshold(const SourceLexicon& bigrams,
                                     std::uint64_t bigram_budget) {
  if (bigrams.items.empty())
    throw ConfigError("estimate_pmi_threshold: empty bigram source");
  if (bigram_budget == 0)
    throw ConfigError("estimate_pmi_threshold: zero budget");
  std::vector<double> scores;
  scores.reserve(bigrams.items.size());
  for (const auto& it : bigrams.items) scores.push_back(it.statistic);
  if (scores.size() <= bigram_budget)
    return *std::min_element(scores.begin(), scores.end());
  std::nth_element(scores.begin(), scores.begin() + (bigram_budget - 1),
                   scores.end(), std::greater<double>());
  return scores[bigram_budget - 1];
}

// Builds the metadata entry list. Admission order: unigrams at or above
// the count threshold, bigrams at or above the estimated PMI cutoff,
// titles by descending view frequency until the projected final size
// (including the synsets still to be appended) reaches total_budget,
// then every synset not already present. Duplicate surfaces are dropped
// at admission time; the first admitting component wins.
inline std::vector<MetadataEntry> build_metadata(
    std::span<const SourceLexicon> sources, const BudgetPlan& plan,
    BuildReport* report = nullptr) {
  const SourceLexicon* by_kind[4] = {nullptr, nullptr, nullptr, nullptr};
  for (const auto& src : sources) {
    auto idx = static_cast<int>(src.kind);
    if (by_kind[idx])
      throw ConfigError(std::string("duplicate source kind: ") +
                        source_kind_name(src.kind));
    by_kind[idx] = &src;
  }
  for (int i = 0; i < 4; ++i) {
    if (!by_kind[i])
      throw ConfigError(std::string("missing source kind: ") +
                        source_kind_name(static_cast<SourceKind>(i)));
  }
  const SourceLexicon& synsets = *by_kind[0];
  const SourceLexicon& unigrams = *by_kind[1];
  const SourceLexicon& bigrams = *by_kind[2];
  const SourceLexicon& titles = *by_kind[3];

  BuildReport rep;
  rep.plan = plan;

  std::vector<MetadataEntry> meta;
  std::unordered_set<std::string> seen;
  seen.reserve(plan.total_budget + synsets.items.size());
  auto admit = [&](const std::string& surface, SourceKind kind) {
    if (surface.empty()) return false;
    if (!seen.insert(surface).second) return false;
    meta.push_back({static_cast<EntryId>(meta.size()), surface, kind});
    return true;
  };

  // (a) unigrams with count >= threshold.
  {
    std::vector<LexiconItem> items = unigrams.items;
    detail::sort_by_statistic(items);
    for (const auto& it : items) {
      if (it.statistic < static_cast<double>(plan.unigram_count_threshold))
        break;
      if (admit(it.surface, SourceKind::kWikiUnigrams)) ++rep.unigrams;
    }
  }

  // (b) bigrams with PMI >= the estimated cutoff.
  if (!bigrams.items.empty()) {
    rep.pmi_threshold = estimate_pmi_threshold(bigrams, plan.bigram_budget);
    std::vector<LexiconItem> items = bigrams.items;
    detail::sort_by_statistic(items);
    for (const auto& it : items) {
      if (it.statistic < rep.pmi_threshold) break;
      if (admit(it.surface, SourceKind::kWikiBigrams)) ++rep.bigrams;
    }
  }

  // (c) titles fill the remaining room, reserving space for the synsets
  // appended in (d): projected = |meta| + |synsets novel w.r.t. meta|.
  {
    std::unordered_set<std::string> novel;
    novel.reserve(synsets.items.size());
    for (const auto& it : synsets.items) {
      if (!it.surface.empty() && !seen.count(it.surface))
        novel.insert(it.surface);
    }
    std::vector<LexiconItem> items = titles.items;
    detail::sort_by_statistic(items);
    std::uint64_t projected = meta.size() + novel.size();
    for (const auto& it : items) {
      if (projected >= plan.total_budget) break;
      bool was_novel_synset = novel.count(it.surface) > 0;
      if (admit(it.surface, SourceKind::kWikiTitles)) {
        ++rep.titles;
        rep.title_view_threshold = it.statistic;
        if (was_novel_synset)
          novel.erase(it.surface);  // projected unchanged
        else
          ++projected;
      }
    }
  }

  // (d) all synsets not already present, appended last.
  {
    std::vector<std::string> surfaces;
    surfaces.reserve(synsets.items.size());
    for (const auto& it : synsets.items) surfaces.push_back(it.surface);
    std::sort(surfaces.begin(), surfaces.end());
    for (const auto& s : surfaces) {
      if (admit(s, SourceKind::kWordNetSynsets)) ++rep.synsets;
    }
  }

  rep.total = meta.size();
  if (report) *report = rep;
  return meta;
}

// --- file formats ---------------------------------------------------------

// Lexicon TSV: `surface<TAB>statistic`, one item per line. Synset lemmas
// render multi-word surfaces with spaces, so underscores are normalized
// here; a synset line without a statistic column is accepted (the value
// is unused).
inline SourceLexicon load_lexicon_tsv(const std::string& path,
                                      SourceKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open lexicon: " + path);
  SourceLexicon lex;
  lex.kind = kind;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    std::string surface;
    double stat = 0.0;
    if (tab == std::string::npos) {
      if (kind != SourceKind::kWordNetSynsets)
        throw DataError(path + ":" + std::to_string(lineno) +
                        ": expected surface<TAB>statistic");
      surface = line;
    } else {
      surface = line.substr(0, tab);
      std::string rest = trim_copy(line.substr(tab + 1));
      if (!rest.empty()) {
        try {
          std::size_t pos = 0;
          stat = std::stod(rest, &pos);
          if (pos != rest.size()) throw std::invalid_argument(rest);
        } catch (const std::exception&) {
          throw DataError(path + ":" + std::to_string(lineno) +
                          ": bad statistic '" + rest + "'");
        }
      }
    }
    surface = trim_copy(surface);
    if (surface.empty()) continue;
    if (kind == SourceKind::kWordNetSynsets)
      std::replace(surface.begin(), surface.end(), '_', ' ');
    lex.items.push_back({std::move(surface), stat});
  }
  return lex;
}

// Metadata file: one surface per line; the 0-based line index is the
// entry id.
inline void write_metadata(const std::string& path,
                           std::span<const MetadataEntry> entries) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write metadata: " + path);
  for (const auto& e : entries) out << e.surface << '\n';
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

inline std::vector<std::string> load_metadata(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open metadata: " + path);
  std::vector<std::string> surfaces;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    surfaces.push_back(line);
  }
  return surfaces;
}

inline void write_build_manifest(const std::string& path,
                                 const BuildReport& rep) {
  nlohmann::json j;
  j["total"] = rep.total;
  j["components"] = {
      {"wordnet_synsets", rep.synsets},
      {"wiki_unigrams", rep.unigrams},
      {"wiki_bigrams", rep.bigrams},
      {"wiki_titles", rep.titles},
  };
  j["thresholds"] = {
      {"unigram_count", rep.plan.unigram_count_threshold},
      {"bigram_pmi", rep.pmi_threshold},
      {"title_view", rep.title_view_threshold
                         ? nlohmann::json(*rep.title_view_threshold)
                         : nlohmann::json(nullptr)},
  };
  j["plan"] = {
      {"total_budget", rep.plan.total_budget},
      {"bigram_budget", rep.plan.bigram_budget},
  };
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write manifest: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace metacurate
