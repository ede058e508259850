#include "metacurate/matcher.hpp"

#include <random>
#include <set>

#include <catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace metacurate;

namespace {

std::vector<EntryId> ids(std::initializer_list<EntryId> v) { return v; }

}  // namespace

TEST_CASE("empty or duplicate pattern sets fail to build") {
  std::vector<std::string> empty;
  CHECK_THROWS_AS(MatchAutomaton(empty, MatchOptions{}), ConfigError);
  std::vector<std::string> dup = {"cat", "dog", "cat"};
  CHECK_THROWS_AS(MatchAutomaton(dup, MatchOptions{}), ConfigError);
  std::vector<std::string> has_empty = {"cat", ""};
  CHECK_THROWS_AS(MatchAutomaton(has_empty, MatchOptions{}), ConfigError);
}

TEST_CASE("single pattern behaves as plain substring search") {
  std::vector<std::string> pats = {"need"};
  MatchAutomaton raw(pats, MatchOptions{BoundaryMode::kRawSubstring});
  CHECK(raw.match("kneed the dough") == ids({0}));
  CHECK(raw.match("need") == ids({0}));
  CHECK(raw.match("nee") == std::vector<EntryId>{});
  CHECK(raw.match("") == std::vector<EntryId>{});
}

TEST_CASE("text equal to one entry surface yields that single id") {
  std::vector<std::string> pats = {"battery", "plate", "barn"};
  MatchAutomaton a(pats, MatchOptions{});
  CHECK(a.match("plate") == ids({1}));
}

TEST_CASE("word boundary semantics") {
  std::vector<std::string> pats = {"dog", "a"};
  MatchAutomaton a(pats, MatchOptions{});
  SECTION("no match inside a longer word") {
    CHECK(a.match("dogma") == std::vector<EntryId>{});
    CHECK(a.match("endogenous") == std::vector<EntryId>{});
  }
  SECTION("single-letter entries respect boundaries") {
    CHECK(a.match("a cat") == ids({1}));
    CHECK(a.match("cat") == std::vector<EntryId>{});
  }
  SECTION("punctuation and start/end are boundaries") {
    CHECK(a.match("dog!house") == ids({0}));
    CHECK(a.match("good dog") == ids({0}));
    CHECK(a.match("dog") == ids({0}));
  }
  SECTION("underscore is not alphanumeric, so it bounds a word") {
    std::vector<std::string> p2 = {"control"};
    MatchAutomaton a2(p2, MatchOptions{});
    CHECK(a2.match("control_14ct") == ids({0}));
  }
}

TEST_CASE("texts with no metadata surface match nothing") {
  // A small slice of common entries; none occurs in these file-name-like
  // strings.
  std::vector<std::string> pats = {"battery", "plate",  "the",  "stone",
                                   "patio",   "build",  "on",   "your"};
  MatchAutomaton a(pats, MatchOptions{});
  CHECK(a.match("control_14ct") == std::vector<EntryId>{});
  CHECK(a.match("cudd2008") == std::vector<EntryId>{});
  CHECK(a.match("product-img") == std::vector<EntryId>{});
  CHECK(a.match("battery plate") == ids({0, 1}));
  CHECK(a.match("How to build a stone patio on your own") ==
        ids({2, 3, 4, 5, 6, 7}));
}

TEST_CASE("utf-8 boundaries use decoded scalars") {
  std::vector<std::string> pats = {"caf", "caf\xC3\xA9", "\xE7\x8C\xAB"};
  // "caf", "café", "猫"
  MatchAutomaton a(pats, MatchOptions{});
  CHECK(a.match("un caf\xC3\xA9!") == ids({1}));       // café matches, caf does not
  CHECK(a.match("caf\xC3\xA9") == ids({1}));
  CHECK(a.match("caf ok") == ids({0}));
  CHECK(a.match("\xE7\x8C\xAB desu") == ids({2}));     // 猫 desu
  // 猫猫: adjacent CJK scalar is a word char, so no boundary between them
  CHECK(a.match("\xE7\x8C\xAB\xE7\x8C\xAB") == std::vector<EntryId>{});
  // quoted: « is punctuation
  CHECK(a.match("\xC2\xAB\xE7\x8C\xAB\xC2\xBB") == ids({2}));
}

TEST_CASE("overlapping and nested patterns are all reported") {
  std::vector<std::string> pats = {"he", "she", "his", "hers", "her"};
  MatchAutomaton raw(pats, MatchOptions{BoundaryMode::kRawSubstring});
  CHECK(raw.match("ushers") == ids({0, 1, 3, 4}));
  MatchAutomaton word(pats, MatchOptions{});
  CHECK(word.match("ushers") == std::vector<EntryId>{});
  CHECK(word.match("she heard hers") == ids({1, 3}));
}

TEST_CASE("matching is idempotent on matched text") {
  std::vector<std::string> pats = {"alpha", "beta", "alpha beta"};
  MatchAutomaton a(pats, MatchOptions{});
  std::string text = "alpha beta gamma";
  auto first = a.match(text);
  CHECK(first == ids({0, 1, 2}));
  CHECK(a.match(text) == first);
}

TEST_CASE("randomized oracle equivalence") {
  std::mt19937_64 gen(7011);
  const std::string alphabet = "abcAB 12.\xC3\xA9";  // includes é
  auto rand_string = [&](std::size_t max_len) {
    std::uniform_int_distribution<std::size_t> len(1, max_len);
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::string s;
    std::size_t n = len(gen);
    for (std::size_t i = 0; i < n; ++i) s.push_back(alphabet[pick(gen)]);
    return s;
  };
  for (int round = 0; round < 400; ++round) {
    std::set<std::string> pat_set;
    std::uniform_int_distribution<int> n_pat(1, 30);
    int want = n_pat(gen);
    while (static_cast<int>(pat_set.size()) < want)
      pat_set.insert(rand_string(6));
    std::vector<std::string> pats(pat_set.begin(), pat_set.end());
    std::string text = rand_string(200);
    for (auto mode :
         {BoundaryMode::kWordBoundary, BoundaryMode::kRawSubstring}) {
      MatchAutomaton a(pats, MatchOptions{mode});
      auto got = a.match(text);
      auto want_ids = testsupport::oracle_match(pats, text, mode);
      REQUIRE(got == want_ids);
    }
  }
}

TEST_CASE("match_shard keeps matched records and counts once per record") {
  testsupport::TempDir dir("shard");
  testsupport::write_file(
      dir / "in.jsonl",
      R"({"uid":"r1","text":"battery plate battery","lang":"en"})"
      "\n"
      R"({"uid":"r2","text":"nothing here"})"
      "\n"
      R"({"uid":"r3","text":"a plate"})"
      "\n"
      R"({"uid":"r4","text":"zzz"})"
      "\n");
  std::vector<std::string> pats = {"battery", "plate"};
  MatchAutomaton a(pats, MatchOptions{});
  JsonlReader reader((dir / "in.jsonl").string());
  JsonlWriter writer((dir / "out.jsonl").string());
  EntryCounts counts = EntryCounts::zeros(2);
  auto sum = match_shard(a, reader, writer, counts);
  writer.close();

  CHECK(sum.records_in == 4);
  CHECK(sum.records_matched == 2);
  CHECK(sum.records_skipped == 0);
  CHECK(counts.counts[0] == 1);  // "battery" twice in r1 counts once
  CHECK(counts.counts[1] == 2);
  CHECK(counts.total == 3);

  // Count identity: sum of counts equals sum of matched set sizes.
  JsonlReader back((dir / "out.jsonl").string(), /*want_matches=*/true);
  Record rec;
  std::uint64_t total_ids = 0;
  std::uint64_t records = 0;
  while (back.next(rec)) {
    ++records;
    total_ids += rec.matched_entry_ids.size();
    CHECK(rec.doc.contains("lang") == (rec.uid == "r1"));  // passthrough
  }
  CHECK(records == 2);
  CHECK(total_ids == counts.total);
}

TEST_CASE("malformed shard lines are skipped, never fatal") {
  testsupport::TempDir dir("garbage");
  testsupport::write_file(dir / "in.jsonl",
                          "not json at all\n"
                          R"({"uid":"r1","text":"plate"})"
                          "\n"
                          R"({"uid":123,"text":"plate"})"
                          "\n"
                          R"({"text":"missing uid"})"
                          "\n"
                          R"({"uid":"r2","text":"battery"})"
                          "\n");
  std::vector<std::string> pats = {"battery", "plate"};
  MatchAutomaton a(pats, MatchOptions{});
  std::ostringstream diag;
  JsonlReader reader((dir / "in.jsonl").string(), false, &diag);
  JsonlWriter writer((dir / "out.jsonl").string());
  EntryCounts counts = EntryCounts::zeros(2);
  auto sum = match_shard(a, reader, writer, counts);
  writer.close();
  CHECK(sum.records_in == 2);
  CHECK(sum.records_matched == 2);
  CHECK(sum.records_skipped == 3);
  CHECK(diag.str().find("skipping malformed record") != std::string::npos);
}

TEST_CASE("no-match shard produces empty output and zero counts") {
  testsupport::TempDir dir("nomatch");
  testsupport::write_file(dir / "in.jsonl",
                          R"({"uid":"r1","text":"xyz"})"
                          "\n");
  std::vector<std::string> pats = {"battery"};
  MatchAutomaton a(pats, MatchOptions{});
  JsonlReader reader((dir / "in.jsonl").string());
  JsonlWriter writer((dir / "out.jsonl").string());
  EntryCounts counts = EntryCounts::zeros(1);
  auto sum = match_shard(a, reader, writer, counts);
  writer.close();
  CHECK(sum.records_matched == 0);
  CHECK(counts.total == 0);
  CHECK(testsupport::read_file(dir / "out.jsonl").empty());
}
