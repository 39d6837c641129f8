/*
 * Copyright 2026 The FeatureBox Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include <json.hpp>

#include "featurebox/common/error.h"
#include "featurebox/viewpipe/clean.h"
#include "featurebox/viewpipe/join.h"
#include "relational_oracle.h"
#include "test_util.h"

namespace featurebox::viewpipe {
namespace {

using columnstore::Column;
using columnstore::ColumnBatch;
using columnstore::ColumnKind;

TEST(PredicateTest, ParsesAndEvaluates) {
  ColumnBatch b({Column::of_int64("age", {12, 30, 18, 40}, {false, false, false, true}),
                 Column::of_strings("city", ColumnKind::kUtf8, {"sf", "nyc", "sf", "sf"})});
  EXPECT_EQ(Predicate::parse("age >= 18").evaluate(b), (std::vector<bool>{false, true, true, false}));
  EXPECT_EQ(Predicate::parse("age >= 18 && city == \"sf\"").evaluate(b),
            (std::vector<bool>{false, false, true, false}));
  EXPECT_EQ(Predicate::parse("age < 13 or city != 'sf'").evaluate(b),
            (std::vector<bool>{true, true, false, false}));
  EXPECT_EQ(Predicate::parse("!(age > 20)").evaluate(b), (std::vector<bool>{true, false, true, true}));
  EXPECT_EQ(Predicate::parse("age == 18.0").evaluate(b), (std::vector<bool>{false, false, true, false}));
  EXPECT_EQ(Predicate::parse("age >= 18").columns(), (std::vector<std::string>{"age"}));
}

TEST(PredicateTest, RejectsBadInput) {
  EXPECT_THROW(Predicate::parse("age >="), ConfigError);
  EXPECT_THROW(Predicate::parse("age 18"), ConfigError);
  EXPECT_THROW(Predicate::parse("(age > 1"), ConfigError);
  EXPECT_THROW(Predicate::parse("city == \"sf"), ConfigError);
  ColumnBatch b({Column::of_int64("age", {1})});
  EXPECT_THROW(Predicate::parse("age == 'x'").evaluate(b), SchemaError);
  EXPECT_THROW(Predicate::parse("nope == 1").evaluate(b), SchemaError);
}

TEST(CleanTest, FillsNulls) {
  ColumnBatch b({Column::of_int64("age", {0, 7}, {true, false})});
  CleanPolicy p;
  p.fills["age"] = int64_t{0};
  auto r = clean_views(b, p);
  EXPECT_EQ(r.batch.column("age"), Column::of_int64("age", {0, 7}));
  EXPECT_EQ(r.batch.column("age").nulls().count(), 0u);
}

TEST(CleanTest, ExtractsJsonPath) {
  ColumnBatch b({Column::of_strings("ctx", ColumnKind::kJson, {R"({"u":{"city":"sf"}})"})});
  CleanPolicy p;
  p.json_extractions.push_back({"ctx", "u.city", "city", ColumnKind::kUtf8});
  auto r = clean_views(b, p);
  EXPECT_EQ(r.batch.column("city").strings(), (std::vector<std::string>{"sf"}));
  EXPECT_EQ(r.batch.column_count(), 2u);
}

TEST(CleanTest, FilterKeepsSurvivorsInOrder) {
  ColumnBatch b({Column::of_int64("age", {12, 30, 18}), Column::of_int64("row", {1, 2, 3})});
  CleanPolicy p;
  p.filter = Predicate::parse("age >= 18");
  auto r = clean_views(b, p);
  EXPECT_EQ(r.batch.column("row").int64s(), (std::vector<int64_t>{2, 3}));
  EXPECT_EQ(r.stats.filtered_rows, 1u);
}

TEST(CleanTest, MalformedJsonDropsRowAndCounts) {
  ColumnBatch b({Column::of_strings("ctx", ColumnKind::kJson, {R"({"a":1})", "{oops", R"({"a":3})"},
                                    {false, false, false}),
                 Column::of_int64("row", {1, 2, 3})});
  CleanPolicy p;
  p.json_extractions.push_back({"ctx", "a", "a", ColumnKind::kInt64});
  auto r = clean_views(b, p);
  EXPECT_EQ(r.stats.malformed_rows, 1u);
  EXPECT_EQ(r.batch.column("row").int64s(), (std::vector<int64_t>{1, 3}));
  EXPECT_EQ(r.batch.column("a").int64s(), (std::vector<int64_t>{1, 3}));
}

TEST(CleanTest, MissingPathAndNullSourceYieldNullsThatFillsCover) {
  ColumnBatch b({Column::of_strings("ctx", ColumnKind::kJson, {R"({"a":1})", "", R"({"b":2})"},
                                    {false, true, false})});
  CleanPolicy p;
  p.json_extractions.push_back({"ctx", "a", "a", ColumnKind::kInt64});
  auto raw = clean_views(b, p);
  EXPECT_EQ(raw.batch.column("a").nulls().count(), 2u);
  p.fills["a"] = int64_t{-1};
  auto filled = clean_views(b, p);
  EXPECT_EQ(filled.batch.column("a").int64s(), (std::vector<int64_t>{1, -1, -1}));
}

TEST(CleanTest, FillKindMismatchIsConfigError) {
  ColumnBatch b({Column::of_int64("age", {1})});
  CleanPolicy p;
  p.fills["age"] = std::string("zero");
  EXPECT_THROW(clean_views(b, p), ConfigError);
}

TEST(CleanTest, UnknownColumnsAndCollisionsAreRejected) {
  ColumnBatch b({Column::of_int64("age", {1}),
                 Column::of_strings("ctx", ColumnKind::kJson, {"{}"})});
  CleanPolicy fill_unknown;
  fill_unknown.fills["nope"] = int64_t{0};
  EXPECT_THROW(clean_views(b, fill_unknown), SchemaError);

  CleanPolicy collide;
  collide.json_extractions.push_back({"ctx", "x", "age", ColumnKind::kUtf8});
  EXPECT_THROW(clean_views(b, collide), SchemaError);

  CleanPolicy bad_source;
  bad_source.json_extractions.push_back({"age", "x", "x", ColumnKind::kUtf8});
  EXPECT_THROW(clean_views(b, bad_source), SchemaError);
}

// Independent evaluator: JSON pointer lookup.
Column pointer_oracle(const Column& docs, const std::string& pointer) {
  Column out("oracle", ColumnKind::kUtf8);
  for (size_t r = 0; r < docs.size(); ++r) {
    auto doc = nlohmann::json::parse(docs.strings()[r]);
    nlohmann::json::json_pointer ptr(pointer);
    if (doc.contains(ptr) && doc.at(ptr).is_string()) out.append_string(doc.at(ptr).get<std::string>());
    else if (doc.contains(ptr) && !doc.at(ptr).is_null()) out.append_string(doc.at(ptr).dump());
    else out.append_null();
  }
  return out;
}

TEST(CleanPropertyTest, JsonExtractionMatchesPointerOracle) {
  std::mt19937_64 rng(5);
  const std::vector<std::string> cities{"sf", "nyc", "la", "sea"};
  std::vector<std::string> docs;
  for (int i = 0; i < 500; ++i) {
    nlohmann::json d;
    switch (rng() % 4) {
      case 0: d["u"]["city"] = cities[rng() % 4]; break;
      case 1: d["u"]["city"] = static_cast<int>(rng() % 100); break;
      case 2: d["u"] = nlohmann::json::object(); break;
      default: d["v"] = "x"; break;
    }
    d["u2"]["n"] = {1, 2, 3};
    docs.push_back(d.dump());
  }
  ColumnBatch b({Column::of_strings("ctx", ColumnKind::kJson, docs)});
  CleanPolicy p;
  p.json_extractions.push_back({"ctx", "u.city", "city", ColumnKind::kUtf8});
  p.json_extractions.push_back({"ctx", "u2.n.1", "n1", ColumnKind::kUtf8});
  auto r = clean_views(b, p);
  auto expect_city = pointer_oracle(b.column("ctx"), "/u/city");
  expect_city.rename("city");
  EXPECT_EQ(r.batch.column("city"), expect_city);
  auto expect_n1 = pointer_oracle(b.column("ctx"), "/u2/n/1");
  expect_n1.rename("n1");
  EXPECT_EQ(r.batch.column("n1"), expect_n1);
}

TEST(CleanPropertyTest, FillAndExtractIsIdempotent) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    Column age("age", ColumnKind::kInt64);
    Column ctx("ctx", ColumnKind::kJson);
    size_t rows = rng() % 100;
    for (size_t i = 0; i < rows; ++i) {
      if (rng() % 4 == 0) age.append_null(); else age.append_int64(static_cast<int64_t>(rng() % 90));
      switch (rng() % 4) {
        case 0: ctx.append_null(); break;
        case 1: ctx.append_string("{broken"); break;
        default: ctx.append_string(R"({"u":{"city":"c)" + std::to_string(rng() % 5) + R"("}})");
      }
    }
    ColumnBatch b({age, ctx});
    CleanPolicy p;
    p.fills["age"] = int64_t{0};
    p.fills["city"] = std::string("unknown");
    p.json_extractions.push_back({"ctx", "u.city", "city", ColumnKind::kUtf8});
    auto once = clean_views(b, p).batch;
    auto twice = clean_views(once, p).batch;
    ASSERT_EQ(once, twice);
    EXPECT_EQ(once.column("age").nulls().count(), 0u);
    EXPECT_EQ(once.column("city").nulls().count(), 0u);
  }
}

ColumnBatch keyed(std::vector<int64_t> keys, const std::string& payload) {
  std::vector<int64_t> vals(keys.size());
  for (size_t i = 0; i < keys.size(); ++i) vals[i] = static_cast<int64_t>(i);
  return ColumnBatch({Column::of_int64("u", std::move(keys)), Column::of_int64(payload, vals)}, {"u"});
}

TEST(JoinTest, InnerJoinSingleMatch) {
  auto out = join_views(keyed({1, 2}, "l"), keyed({2, 3}, "r"), JoinSpec{{"u"}});
  ASSERT_EQ(out.row_count(), 1u);
  EXPECT_EQ(out.column("u").int64s(), (std::vector<int64_t>{2}));
  EXPECT_EQ(out.column("l").int64s(), (std::vector<int64_t>{1}));
  EXPECT_EQ(out.column("r").int64s(), (std::vector<int64_t>{0}));
}

TEST(JoinTest, EmptyRightSideKeepsConcatenatedSchema) {
  auto out = join_views(keyed({1, 2}, "l"), keyed({}, "r"), JoinSpec{{"u"}});
  EXPECT_EQ(out.row_count(), 0u);
  ASSERT_EQ(out.column_count(), 3u);
  EXPECT_EQ(out.column(2).name(), "r");
}

TEST(JoinTest, DuplicateKeysMultiply) {
  auto out = join_views(keyed({5, 5}, "l"), keyed({5, 5}, "r"), JoinSpec{{"u"}});
  EXPECT_EQ(out.row_count(), 4u);
  EXPECT_EQ(out.column("l").int64s(), (std::vector<int64_t>{0, 0, 1, 1}));
  EXPECT_EQ(out.column("r").int64s(), (std::vector<int64_t>{0, 1, 0, 1}));
}

TEST(JoinTest, ErrorsOnKindMismatchAndCollision) {
  ColumnBatch s({Column::of_strings("u", ColumnKind::kUtf8, {"1"})});
  EXPECT_THROW(join_views(keyed({1}, "l"), s, JoinSpec{{"u"}}), SchemaError);
  EXPECT_THROW(join_views(keyed({1}, "l"), keyed({1}, "l"), JoinSpec{{"u"}}), SchemaError);
  EXPECT_THROW(join_views(keyed({1}, "l"), keyed({1}, "r"), JoinSpec{{"v"}}), SchemaError);
  EXPECT_THROW(join_views(keyed({1}, "l"), keyed({1}, "r"), JoinSpec{}), SchemaError);
}

TEST(JoinTest, NullKeysNeverMatch) {
  ColumnBatch l({Column::of_int64("u", {1, 0}, {false, true}), Column::of_int64("l", {0, 1})});
  ColumnBatch r({Column::of_int64("u", {1, 0}, {false, true}), Column::of_int64("r", {0, 1})});
  EXPECT_EQ(join_views(l, r, JoinSpec{{"u"}}).row_count(), 1u);
}

TEST(JoinTest, OutputOrderedByKeyThenRowIndex) {
  auto out = join_views(keyed({3, 1, 3, 2}, "l"), keyed({3, 2, 1, 3}, "r"), JoinSpec{{"u"}});
  EXPECT_EQ(out.column("u").int64s(), (std::vector<int64_t>{1, 2, 3, 3, 3, 3}));
  EXPECT_EQ(out.column("l").int64s(), (std::vector<int64_t>{1, 3, 0, 0, 2, 2}));
  EXPECT_EQ(out.column("r").int64s(), (std::vector<int64_t>{2, 1, 0, 3, 0, 3}));
}

TEST(JoinTest, CanonicalKeyIsTagPlusBigEndian) {
  ColumnBatch b({Column::of_int64("k", {0x0102}), Column::of_strings("s", ColumnKind::kUtf8, {"ab"})});
  std::string k = canonical_key(b, {0, 1}, 0);
  const std::string expect("\x01\x00\x00\x00\x00\x00\x00\x01\x02"
                           "\x03\x00\x00\x00\x02"
                           "ab",
                           16);
  EXPECT_EQ(k, expect);
}

// Small random tables with a multi-column key over narrow domains so that
// duplicates, misses and nulls all occur.
ColumnBatch random_side(std::mt19937_64& rng, size_t rows, const std::string& prefix) {
  Column k1("k1", ColumnKind::kInt64);
  Column k2("k2", ColumnKind::kUtf8);
  Column v(prefix + "_v", ColumnKind::kFloat32);
  Column s(prefix + "_s", ColumnKind::kUtf8);
  for (size_t i = 0; i < rows; ++i) {
    if (rng() % 20 == 0) k1.append_null(); else k1.append_int64(static_cast<int64_t>(rng() % 7) - 3);
    if (rng() % 20 == 0) k2.append_null(); else k2.append_string(std::string(1, static_cast<char>('a' + rng() % 3)));
    if (rng() % 10 == 0) v.append_null(); else v.append_float32(static_cast<float>(rng() % 100));
    s.append_string(featurebox::testing::random_text(rng, 5));
  }
  return ColumnBatch({k1, k2, v, s});
}

TEST(JoinPropertyTest, MatchesNestedLoopOracle) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 40; ++trial) {
    size_t nl = rng() % 201;
    size_t nr = rng() % 201;
    auto left = random_side(rng, nl, "l");
    auto right = random_side(rng, nr, "r");
    std::vector<std::string> keys = rng() % 2 ? std::vector<std::string>{"k1"}
                                              : std::vector<std::string>{"k1", "k2"};
    if (keys.size() == 1) {
      // Single-key join: k2 becomes payload on the left and must be
      // renamed on the right to avoid a collision.
      right.column("k2").rename("rk2");
    }
    auto out = join_views(left, right, JoinSpec{keys});
    ASSERT_EQ(featurebox::testing::canonical_rows(out),
              featurebox::testing::nested_loop_join(left, right, keys))
        << "trial " << trial;
  }
}

ColumnBatch features(std::vector<int64_t> ids, const std::string& col) {
  std::vector<int64_t> vals;
  for (auto id : ids) vals.push_back(id * 10);
  return ColumnBatch({Column::of_int64("instance_id", std::move(ids)), Column::of_int64(col, vals)});
}

TEST(MergeTest, KeepsOnlyMatchingInstances) {
  auto out = merge_features(features({10, 11}, "x"), features({11, 12}, "b"));
  EXPECT_EQ(out.column("instance_id").int64s(), (std::vector<int64_t>{11}));
  EXPECT_EQ(out.column("b").int64s(), (std::vector<int64_t>{110}));
}

TEST(MergeTest, KeyCompleteMergeUnionsColumns) {
  auto out = merge_features(features({3, 1, 2}, "x"), features({2, 3, 1}, "b"));
  EXPECT_EQ(out.row_count(), 3u);
  EXPECT_EQ(out.column_count(), 3u);
}

TEST(MergeTest, RejectsDuplicatesAndMissingIds) {
  EXPECT_THROW(merge_features(features({1, 1}, "x"), features({1}, "b")), SchemaError);
  EXPECT_THROW(merge_features(features({1}, "x"), features({1, 1}, "b")), SchemaError);
  ColumnBatch no_id({Column::of_int64("other", {1})});
  EXPECT_THROW(merge_features(no_id, features({1}, "b")), SchemaError);
}

TEST(MergePropertyTest, IdentityKeyedMergePreservesRows) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int64_t> ids(rng() % 300);
    std::iota(ids.begin(), ids.end(), static_cast<int64_t>(rng() % 1000));
    std::shuffle(ids.begin(), ids.end(), rng);
    auto x = features(ids, "x");
    ColumnBatch identity({Column::of_int64("instance_id", ids)});
    auto out = merge_features(x, identity);
    EXPECT_EQ(featurebox::testing::canonical_rows(out), featurebox::testing::canonical_rows(x));
  }
}

TEST(MergePropertyTest, MatchesNestedLoopOracle) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 40; ++trial) {
    auto draw_ids = [&](size_t n) {
      std::vector<int64_t> pool(400);
      std::iota(pool.begin(), pool.end(), 0);
      std::shuffle(pool.begin(), pool.end(), rng);
      pool.resize(n);
      return pool;
    };
    auto x = features(draw_ids(rng() % 200), "x");
    auto b = features(draw_ids(rng() % 200), "b");
    auto out = merge_features(x, b);
    ASSERT_EQ(featurebox::testing::canonical_rows(out),
              featurebox::testing::nested_loop_join(x, b, {"instance_id"}));
  }
}

}  // namespace
}  // namespace featurebox::viewpipe
