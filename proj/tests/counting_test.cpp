#include "metacurate/counting.hpp"

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

}  // namespace

TEST_CASE("merge of one shard is the identity") {
  std::vector<EntryCounts> shards = {make_counts({3, 0, 7})};
  auto merged = merge_counts(shards);
  CHECK(merged.counts == std::vector<std::uint64_t>{3, 0, 7});
  CHECK(merged.total == 10);
}

TEST_CASE("merge is elementwise addition") {
  std::vector<EntryCounts> shards = {make_counts({1, 0, 2}),
                                     make_counts({0, 3, 0})};
  auto merged = merge_counts(shards);
  CHECK(merged.counts == std::vector<std::uint64_t>{1, 3, 2});
  CHECK(merged.total == 6);
}

TEST_CASE("length mismatch is a metadata-version error") {
  std::vector<EntryCounts> shards = {make_counts({1, 2}), make_counts({1, 2, 3})};
  CHECK_THROWS_AS(merge_counts(shards), DataError);
}

TEST_CASE("sharded merge equals a single-pass recount") {
  std::mt19937_64 gen(42);
  const std::size_t n_entries = 50;
  // Random per-record matched sets, partitioned into 16 shards.
  std::vector<std::vector<EntryId>> records;
  for (int r = 0; r < 2000; ++r) {
    std::vector<EntryId> m;
    std::uniform_int_distribution<int> k(0, 5);
    std::uniform_int_distribution<EntryId> e(0, n_entries - 1);
    int kk = k(gen);
    for (int i = 0; i < kk; ++i) m.push_back(e(gen));
    std::sort(m.begin(), m.end());
    m.erase(std::unique(m.begin(), m.end()), m.end());
    records.push_back(std::move(m));
  }

  EntryCounts whole = EntryCounts::zeros(n_entries);
  for (const auto& m : records) whole.add_record(m);

  std::vector<EntryCounts> shards(16, EntryCounts::zeros(n_entries));
  for (std::size_t i = 0; i < records.size(); ++i)
    shards[i % 16].add_record(records[i]);
  auto merged = merge_counts(shards);
  CHECK(merged.counts == whole.counts);
  CHECK(merged.total == whole.total);

  // Associativity/commutativity: merge in reversed order and in two
  // nested groups.
  std::vector<EntryCounts> reversed(shards.rbegin(), shards.rend());
  auto merged_rev = merge_counts(reversed);
  CHECK(merged_rev.counts == merged.counts);

  std::vector<EntryCounts> left(shards.begin(), shards.begin() + 7);
  std::vector<EntryCounts> right(shards.begin() + 7, shards.end());
  std::vector<EntryCounts> grouped = {merge_counts(left), merge_counts(right)};
  auto merged_grp = merge_counts(grouped);
  CHECK(merged_grp.counts == merged.counts);
  CHECK(merged_grp.total == merged.total);
}

TEST_CASE("summarize reports zeros, heads, and top entries") {
  auto counts = make_counts({0, 5, 100, 0, 40, 7});
  auto s = summarize(counts, 10, 3);
  CHECK(s.zero_entries == 2);
  CHECK(s.above_t_entries == 2);
  CHECK(s.above_t_total == 140);
  CHECK(s.share_above_t == Approx(140.0 / 152.0));
  REQUIRE(s.top.size() == 3);
  CHECK(s.top[0] == std::pair<EntryId, std::uint64_t>{2, 100});
  CHECK(s.top[1] == std::pair<EntryId, std::uint64_t>{4, 40});
  CHECK(s.top[2] == std::pair<EntryId, std::uint64_t>{5, 7});
}

TEST_CASE("uniform counts at t leave nothing above t") {
  auto counts = make_counts({7, 7, 7, 7});
  auto s = summarize(counts, 7);
  CHECK(s.above_t_entries == 0);
  CHECK(s.above_t_total == 0);
}

TEST_CASE("share above t never increases with t") {
  std::mt19937_64 gen(99);
  for (int round = 0; round < 10; ++round) {
    std::vector<std::uint64_t> v(100);
    for (auto& c : v) c = gen() % 10'000;
    auto counts = make_counts(std::move(v));
    double prev = 1.1;
    for (std::uint64_t t : {1, 10, 100, 1000, 5000, 20000}) {
      double share = summarize(counts, t).share_above_t;
      CHECK(share <= prev + 1e-12);
      prev = share;
    }
  }
}

TEST_CASE("counts CSV roundtrip materializes omitted zeros") {
  testsupport::TempDir dir("counts");
  auto counts = make_counts({0, 12, 0, 0, 99, 1, 0});
  auto path = (dir / "c.csv").string();
  write_counts_csv(path, counts, "abc123");
  auto lc = load_counts_csv(path);
  CHECK(lc.metadata_sha == "abc123");
  CHECK(lc.counts.counts == counts.counts);
  CHECK(lc.counts.total == counts.total);

  // Zero rows are genuinely absent on disk.
  auto body = testsupport::read_file(path);
  CHECK(body.find("0,0") == std::string::npos);
  CHECK(body.find("# metadata_sha256=abc123 total=112 entries=7") == 0);
}

TEST_CASE("corrupt counts files fail loudly") {
  testsupport::TempDir dir("badcounts");
  SECTION("missing header") {
    testsupport::write_file(dir / "c.csv", "entry_id,count\n1,5\n");
    CHECK_THROWS_AS(load_counts_csv((dir / "c.csv").string()), DataError);
  }
  SECTION("declared total disagrees with rows") {
    testsupport::write_file(
        dir / "c.csv",
        "# metadata_sha256=x total=999 entries=3\nentry_id,count\n1,5\n");
    CHECK_THROWS_AS(load_counts_csv((dir / "c.csv").string()), DataError);
  }
  SECTION("id out of declared range") {
    testsupport::write_file(
        dir / "c.csv",
        "# metadata_sha256=x total=5 entries=3\nentry_id,count\n7,5\n");
    CHECK_THROWS_AS(load_counts_csv((dir / "c.csv").string()), DataError);
  }
  SECTION("duplicate id") {
    testsupport::write_file(
        dir / "c.csv",
        "# metadata_sha256=x total=10 entries=3\nentry_id,count\n1,5\n1,5\n");
    CHECK_THROWS_AS(load_counts_csv((dir / "c.csv").string()), DataError);
  }
}
