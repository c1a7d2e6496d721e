#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "pretrec/data/features.hpp"
#include "pretrec/data/interactions.hpp"
#include "pretrec/data/sampling.hpp"
#include "pretrec/data/synthetic.hpp"
#include "pretrec/error.hpp"
#include "test_support.hpp"

using namespace pretrec;

namespace {

InteractionMatrix matrix_from(std::size_t users, std::size_t items,
                              std::initializer_list<std::pair<std::size_t, std::size_t>> pairs) {
  InteractionMatrix m;
  m.n_users = users;
  m.n_items = items;
  for (auto [u, i] : pairs) m.entries.push_back({u, i, 1.0, Split::unassigned});
  m.eval_excluded.assign(users, false);
  return m;
}

InteractionMatrix random_matrix(std::size_t users, std::size_t items, double density,
                                std::uint64_t seed) {
  RngStream rng(seed);
  InteractionMatrix m;
  m.n_users = users;
  m.n_items = items;
  for (std::size_t u = 0; u < users; ++u)
    for (std::size_t i = 0; i < items; ++i)
      if (rng.bernoulli(density)) m.entries.push_back({u, i, 1.0, Split::unassigned});
  m.eval_excluded.assign(users, false);
  return m;
}

}  // namespace

TEST_CASE("load_interactions: pairs map to dense indices and are binarized") {
  const auto loaded = parse_interactions("a\tx\na\ty\nb\tx\n");
  CHECK(loaded.matrix.n_users == 2);
  CHECK(loaded.matrix.n_items == 2);
  CHECK(loaded.matrix.entries.size() == 3);
  for (const auto& e : loaded.matrix.entries) CHECK(e.value == 1.0);
  CHECK(loaded.users.raw_id(1) == "b");
  CHECK(*loaded.items.find("y") == 1);

  const auto rated = parse_interactions("# comment\nu1\ti1\t5\nu1\ti2\t1\nu2\ti1\t3.5\n");
  CHECK(rated.matrix.entries.size() == 3);
  for (const auto& e : rated.matrix.entries) CHECK(e.value == 1.0);
}

TEST_CASE("load_interactions: malformed lines and duplicates") {
  try {
    parse_interactions("a\tx\nbroken-line\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_interactions("a\tx\tnot-a-number\n"), ParseError);
  const auto dup = parse_interactions("a\tx\na\tx\t4\nb\tx\n");
  CHECK(dup.duplicates_skipped == 1);
  CHECK(dup.matrix.entries.size() == 2);
}

TEST_CASE("load_interactions: loading twice gives identical matrices; index map round trip") {
  const test::TempDir dir;
  const auto path = dir.path() / "inter.tsv";
  test::write_text(path, "a\tx\nb\ty\nc\tx\nc\tz\n");
  const auto first = load_interactions(path);
  const auto second = load_interactions(path);
  CHECK(first.matrix == second.matrix);
  first.users.save(dir.path() / "users.tsv");
  CHECK(IndexMap::load(dir.path() / "users.tsv") == first.users);
}

TEST_CASE("load_interactions: Foursquare-shaped file") {
  const test::TempDir dir;
  const auto path = dir.path() / "foursquare.tsv";
  {
    std::ofstream out(path);
    // Deterministic distinct pairs touching every user and every item.
    std::set<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t u = 0; u < 2060; ++u) pairs.emplace(u, u % 2876);
    for (std::size_t i = 0; i < 2876; ++i) pairs.emplace(i % 2060, i);
    RngStream rng(1);
    while (pairs.size() < 27149) pairs.emplace(rng.uniform_index(2060), rng.uniform_index(2876));
    for (auto [u, i] : pairs) out << "user" << u << '\t' << "venue" << i << '\t' << 1 + (u + i) % 5 << '\n';
  }
  const auto loaded = load_interactions(path);
  CHECK(loaded.matrix.n_users == 2060);
  CHECK(loaded.matrix.n_items == 2876);
  CHECK(loaded.matrix.entries.size() == 27149);
}

TEST_CASE("load_features: sparse rows, missing entities, header and bounds") {
  const IndexMap ids = IndexMap::identity(3);
  const auto f = parse_features("#k=4\n0\t0:1 3:1\n", ids, 3);
  CHECK(f.features.values.row(0)[0] == 1.0);
  CHECK(f.features.values(0, 3) == 1.0);
  CHECK(f.features.values(0, 1) == 0.0);
  CHECK(f.zero_rows == 2);

  const auto empty = parse_features("#k=4\n", ids, 3);
  CHECK(empty.features.values == Tensor2(3, 4));
  CHECK(empty.zero_rows == 3);

  CHECK_THROWS_AS(parse_features("0\t0:1\n", ids, 3), ParseError);
  try {
    parse_features("#k=4\n0\t0:1\n1\t4:1\n", ids, 3);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  const auto unknown = parse_features("#k=2\nghost\t0:1\n", ids, 3);
  CHECK(unknown.unresolved_ids == 1);
}

TEST_CASE("load_features: Movielens-shaped user file declares 21 features") {
  const IndexMap ids = IndexMap::identity(2);
  const auto f = parse_features("#k=21\n0\t0:1 4:1 20:1\n1\t1:1 9:1\n", ids, 2);
  CHECK(f.features.feature_count() == 21);
  CHECK(f.features.kinds[0] == ColumnKind::binary);
}

TEST_CASE("categorize_real_feature: buckets, clamping and errors") {
  const std::vector<double> values{25.0, 0.0, 95.0, 10.0};
  const Tensor2 onehot = categorize_real_feature(values, 10.0, 8);
  CHECK(onehot.cols() == 8);
  const Tensor2 expected_first = Tensor2::from_rows({{0, 0, 1, 0, 0, 0, 0, 0}});
  for (std::size_t b = 0; b < 8; ++b) CHECK(onehot(0, b) == expected_first[b]);
  CHECK(onehot(1, 0) == 1.0);
  CHECK(onehot(2, 7) == 1.0);
  CHECK(onehot(3, 1) == 1.0);
  for (std::size_t e = 0; e < 4; ++e) {
    double s = 0;
    for (double v : onehot.row(e)) s += v;
    CHECK(s == 1.0);
  }
  const std::vector<double> negative{-1.0};
  CHECK_THROWS_AS(categorize_real_feature(negative, 10.0, 8), DataError);
  CHECK_THROWS_AS(categorize_real_feature(values, 0.0, 8), ConfigError);
  CHECK_THROWS_AS(categorize_real_feature(values, 10.0, 0), ConfigError);

  FeatureMatrix f(2, 2);
  f.values = Tensor2::from_rows({{1, 34}, {0, 61}});
  f.infer_kinds();
  CHECK(f.kinds[1] == ColumnKind::real);
  f.categorize_column(1, 10.0, 8);
  CHECK(f.feature_count() == 9);
  CHECK(f.values(0, 4) == 1.0);
  CHECK(f.values(1, 7) == 1.0);
  CHECK(f.kinds[1] == ColumnKind::categorical_onehot);
}

TEST_CASE("leave_one_out_split: counts, degenerate users, determinism, partition") {
  const auto m = matrix_from(2, 6, {{0, 0}, {0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 0}, {1, 5}});
  const auto s = leave_one_out_split(m, RngStream(3));
  std::map<Split, int> user0;
  for (const auto& e : s.entries)
    if (e.user == 0) ++user0[e.split];
  CHECK(user0[Split::train] == 3);
  CHECK(user0[Split::validation] == 1);
  CHECK(user0[Split::test] == 1);
  for (const auto& e : s.entries)
    if (e.user == 1) CHECK(e.split == Split::train);
  CHECK(s.eval_excluded[1]);
  CHECK_FALSE(s.eval_excluded[0]);
  CHECK(leave_one_out_split(m, RngStream(3)) == s);

  const auto big = random_matrix(40, 30, 0.2, 8);
  const auto split = leave_one_out_split(big, RngStream(1));
  REQUIRE(split.entries.size() == big.entries.size());
  for (std::size_t k = 0; k < big.entries.size(); ++k) {
    CHECK(split.entries[k].user == big.entries[k].user);
    CHECK(split.entries[k].item == big.entries[k].item);
    CHECK(split.entries[k].split != Split::unassigned);
  }
}

TEST_CASE("build_eval_sets: forced negatives, seeds, leakage") {
  // User 0 interacted with items 0..4 out of 105 -> exactly 100 eligible negatives.
  auto m = matrix_from(1, 105, {{0, 0}, {0, 1}, {0, 2}, {0, 3}, {0, 4}});
  m = leave_one_out_split(m, RngStream(0));
  const auto set = build_candidate_set(m, Split::test, 100, 9);
  REQUIRE(set.users.size() == 1);
  auto negs = set.users[0].negatives;
  std::sort(negs.begin(), negs.end());
  std::vector<std::size_t> expected;
  for (std::size_t i = 5; i < 105; ++i) expected.push_back(i);
  CHECK(negs == expected);
  CHECK_FALSE(set.users[0].short_of_negatives);

  const auto short_set = build_candidate_set(m, Split::test, 200, 9);
  CHECK(short_set.users[0].short_of_negatives);
  CHECK(short_set.short_users == 1);
  CHECK(short_set.users[0].negatives.size() == 100);

  const auto big = leave_one_out_split(random_matrix(30, 300, 0.05, 2), RngStream(4));
  const auto sets = build_eval_sets(big, 10, 100, 1000);
  CHECK(sets.size() == 10);
  for (std::size_t i = 0; i < sets.size(); ++i) CHECK(sets[i].seed == 1000 + i);
  bool differ = false;
  for (std::size_t u = 0; u < sets[0].users.size(); ++u)
    differ = differ || sets[0].users[u].negatives != sets[1].users[u].negatives;
  CHECK(differ);

  const UserItemIndex index(big);
  for (const auto& s : sets) {
    for (const auto& c : s.users) {
      CHECK(c.negatives.size() == 100);
      CHECK(c.positive == *index.held_out(c.user, Split::test));
      std::set<std::size_t> uniq(c.negatives.begin(), c.negatives.end());
      CHECK(uniq.size() == c.negatives.size());
      for (std::size_t n : c.negatives) CHECK_FALSE(index.interacted(c.user, n));
    }
  }
  CHECK_THROWS_AS(build_eval_sets(big, 0, 100, 1), ConfigError);
}

TEST_CASE("TrainSampler: counts, forced negatives, epoch coverage") {
  const auto big = leave_one_out_split(random_matrix(50, 80, 0.3, 5), RngStream(6));
  RngStream rng(7);
  const TrainSampler sampler(big, 1000, 4);
  CHECK(sampler.positives_per_batch() == 200);
  const auto batches = sampler.epoch(rng);
  REQUIRE(batches.size() >= 2);
  CHECK(batches[0].size() == 1000);
  CHECK(batches[0].positives == 200);
  CHECK(std::count(batches[0].labels.begin(), batches[0].labels.end(), 1.0) == 200);

  const UserItemIndex index(big);
  std::multiset<std::pair<std::size_t, std::size_t>> covered;
  for (const auto& b : batches) {
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (b.labels[k] == 1.0) {
        CHECK(index.train_positive(b.users[k], b.items[k]));
        covered.emplace(b.users[k], b.items[k]);
      } else {
        CHECK_FALSE(index.interacted(b.users[k], b.items[k]));
      }
    }
  }
  std::multiset<std::pair<std::size_t, std::size_t>> expected;
  for (const auto& e : big.entries)
    if (e.split == Split::train) expected.emplace(e.user, e.item);
  CHECK(covered == expected);

  // One user who has seen everything except item 3.
  const auto forced = matrix_from(1, 4, {{0, 0}, {0, 1}, {0, 2}});
  const auto batch = sample_train_batch(forced, 50, 4, rng);
  for (std::size_t k = 0; k < batch.size(); ++k)
    if (batch.labels[k] == 0.0) CHECK(batch.items[k] == 3);
}

TEST_CASE("generate_cluster_dataset: shapes and planted structure") {
  const auto d = generate_cluster_dataset({.seed = 3});
  CHECK(d.interactions.n_users == 200);
  CHECK(d.user_features.feature_count() == 15);
  std::size_t within = 0;
  for (const auto& e : d.interactions.entries) within += (e.user % 10) == (e.item % 10);
  // Expected 200*20*0.3 = 1200 within-cluster links and 200*180*0.02 = 720 cross links.
  CHECK(within > 1000);
  CHECK(within < 1400);
  CHECK(d.interactions.entries.size() - within < 900);
  CHECK(generate_cluster_dataset({.seed = 3}).interactions == d.interactions);
}
