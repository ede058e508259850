#include "metacurate/balancer.hpp"

#include <cmath>
#include <random>

#include <catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace metacurate;
using Catch::Approx;

namespace {

EntryCounts make_counts(std::vector<std::uint64_t> v) {
  EntryCounts ec;
  ec.counts = std::move(v);
  ec.total = ec.recompute_total();
  return ec;
}

EntryProbabilities make_probs(std::vector<double> p) {
  EntryProbabilities ep;
  ep.probs = std::move(p);
  return ep;
}

}  // namespace

TEST_CASE("probabilities are t/count clamped to 1") {
  auto counts = make_counts({54'000'000, 500, 0, 20'000, 20'001});
  auto probs = compute_probabilities(counts, 20'000);
  CHECK(probs.probs[0] == Approx(20'000.0 / 54'000'000.0).epsilon(1e-15));
  CHECK(probs.probs[0] == Approx(3.7037e-4).epsilon(1e-3));
  CHECK(probs.probs[1] == 1.0);  // tail clamp
  CHECK(probs.probs[2] == 1.0);  // zero-count clamp, vacuous
  CHECK(probs.probs[3] == 1.0);  // boundary: count == t stays tail
  CHECK(probs.probs[4] == Approx(20'000.0 / 20'001.0));
  CHECK_THROWS_AS(compute_probabilities(counts, 0), ConfigError);
}

TEST_CASE("records with a tail entry are always kept") {
  auto probs = make_probs({0.001, 1.0});
  std::vector<EntryId> matched = {0, 1};
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    CurationConfig cfg{10, seed, ""};
    CHECK(keep_decision("uid-x", matched, probs, cfg));
  }
}

TEST_CASE("records with no matched entries are dropped") {
  auto probs = make_probs({0.5});
  CurationConfig cfg{10, 7, ""};
  CHECK_FALSE(keep_decision("uid-y", {}, probs, cfg));
}

TEST_CASE("out-of-range entry id is a data corruption error") {
  auto probs = make_probs({0.5});
  std::vector<EntryId> matched = {3};
  CurationConfig cfg{10, 7, ""};
  CHECK_THROWS_AS(keep_decision("uid-z", matched, probs, cfg), DataError);
}

TEST_CASE("two 0.5 entries keep about three quarters of draws") {
  auto probs = make_probs({0.5, 0.5});
  std::vector<EntryId> matched = {0, 1};
  const std::uint64_t n = 100'000;
  std::uint64_t kept = 0;
  for (std::uint64_t seed = 0; seed < n; ++seed) {
    CurationConfig cfg{10, seed, ""};
    if (keep_decision("fixed-uid", matched, probs, cfg)) ++kept;
  }
  double p = 0.75;
  double sigma = std::sqrt(p * (1 - p) / static_cast<double>(n));
  double rate = static_cast<double>(kept) / static_cast<double>(n);
  CHECK(std::abs(rate - p) <= 3 * sigma);
}

TEST_CASE("keep decision is invariant to iteration order") {
  // Draws are keyed per entry, so OR-ing them in any order gives the
  // same decision, not merely the same rate.
  std::mt19937_64 gen(314);
  auto probs = make_probs({0.3, 0.7, 0.01, 0.99, 0.5});
  for (int round = 0; round < 5000; ++round) {
    std::vector<EntryId> asc = {0, 2, 4};
    CurationConfig cfg{10, gen(), ""};
    bool forward = keep_decision("u", asc, probs, cfg);
    std::vector<EntryId> desc(asc.rbegin(), asc.rend());
    bool backward = keep_decision("u", desc, probs, cfg);
    CHECK(forward == backward);
  }
}

TEST_CASE("decisions depend only on (seed, uid, entry ids)") {
  auto probs = make_probs({0.2, 0.8});
  std::vector<EntryId> matched = {0, 1};
  CurationConfig cfg{10, 424242, ""};
  bool first = keep_decision("stable-uid", matched, probs, cfg);
  for (int i = 0; i < 100; ++i)
    CHECK(keep_decision("stable-uid", matched, probs, cfg) == first);
  // Different uid draws independently.
  std::uint64_t diff = 0;
  for (int i = 0; i < 1000; ++i) {
    if (keep_decision("uid-" + std::to_string(i), matched, probs, cfg) !=
        first)
      ++diff;
  }
  CHECK(diff > 0);
}

TEST_CASE("denser head-only records are kept more often") {
  auto probs = make_probs({0.3, 0.3, 0.3});
  std::uint64_t kept1 = 0, kept3 = 0;
  const std::uint64_t n = 200'000;
  for (std::uint64_t seed = 0; seed < n; ++seed) {
    CurationConfig cfg{10, seed, ""};
    if (keep_decision("u", std::vector<EntryId>{0}, probs, cfg)) ++kept1;
    if (keep_decision("u", std::vector<EntryId>{0, 1, 2}, probs, cfg)) ++kept3;
  }
  // 0.3 vs 1 - 0.7^3 = 0.657
  CHECK(kept3 > kept1);
  double rate1 = static_cast<double>(kept1) / n;
  double rate3 = static_cast<double>(kept3) / n;
  CHECK(rate1 == Approx(0.3).margin(3 * std::sqrt(0.3 * 0.7 / n)));
  CHECK(rate3 == Approx(0.657).margin(3 * std::sqrt(0.657 * 0.343 / n)));
}

TEST_CASE("curate_shard with all probabilities 1 is the identity") {
  testsupport::TempDir dir("curate_id");
  std::string body =
      R"({"uid":"r1","text":"a b","matched_entry_ids":[0]})"
      "\n"
      R"({"uid":"r2","text":"c","matched_entry_ids":[1,2]})"
      "\n";
  testsupport::write_file(dir / "in.jsonl", body);
  auto probs = make_probs({1.0, 1.0, 1.0});
  CurationConfig cfg{1'000'000, 5, ""};
  JsonlReader reader((dir / "in.jsonl").string(), true);
  JsonlWriter writer((dir / "out.jsonl").string());
  auto sum = curate_shard(reader, writer, probs, cfg);
  writer.close();
  CHECK(sum.records_in == 2);
  CHECK(sum.records_kept == 2);
  CHECK(testsupport::read_file(dir / "out.jsonl") == body);
}

TEST_CASE("digest mismatch between probs and config aborts curation") {
  testsupport::TempDir dir("curate_sha");
  testsupport::write_file(dir / "in.jsonl", "");
  auto probs = make_probs({1.0});
  probs.metadata_sha = "aaa";
  CurationConfig cfg{10, 5, "bbb"};
  JsonlReader reader((dir / "in.jsonl").string(), true);
  JsonlWriter writer((dir / "out.jsonl").string());
  CHECK_THROWS_AS(curate_shard(reader, writer, probs, cfg), ConfigError);
}

TEST_CASE("expected curated size") {
  SECTION("all-tail pool expects the whole pool") {
    auto probs = make_probs({1.0, 1.0});
    ExpectedSizeAccumulator acc(probs);
    for (int i = 0; i < 100; ++i) acc.add(std::vector<EntryId>{0});
    CHECK(acc.expected() == Approx(100.0));
  }
  SECTION("single head entry with c records expects exactly t") {
    const std::uint64_t c = 1000, t = 37;
    auto counts = make_counts({c});
    auto probs = compute_probabilities(counts, t);
    ExpectedSizeAccumulator acc(probs);
    for (std::uint64_t i = 0; i < c; ++i) acc.add(std::vector<EntryId>{0});
    CHECK(acc.expected() == Approx(static_cast<double>(t)).epsilon(1e-9));
  }
  SECTION("matches Monte-Carlo curation within 3 sigma") {
    std::mt19937_64 gen(2718);
    auto probs = make_probs({0.05, 0.4, 0.9, 1.0});
    std::vector<std::vector<EntryId>> pool;
    for (int i = 0; i < 500; ++i) {
      std::vector<EntryId> m;
      for (EntryId e = 0; e < 4; ++e)
        if (gen() % 3 == 0) m.push_back(e);
      pool.push_back(std::move(m));
    }
    ExpectedSizeAccumulator acc(probs);
    for (const auto& m : pool) acc.add(m);

    const int runs = 200;
    std::vector<double> sizes;
    for (int r = 0; r < runs; ++r) {
      CurationConfig cfg{10, static_cast<std::uint64_t>(r) * 7919 + 13, ""};
      std::uint64_t kept = 0;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (!pool[i].empty() &&
            keep_decision("rec-" + std::to_string(i), pool[i], probs, cfg))
          ++kept;
      }
      sizes.push_back(static_cast<double>(kept));
    }
    auto ms = testsupport::mean_std(sizes);
    double sem = ms.stddev / std::sqrt(static_cast<double>(runs));
    CHECK(std::abs(ms.mean - acc.expected()) <= 3 * sem + 1e-9);
  }
}
