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

#include "featurebox/pipeline/corpus.h"

#include <fstream>
#include <random>

#include <json.hpp>

#include "featurebox/columnstore/fbxc.h"
#include "featurebox/common/error.h"

namespace featurebox::pipeline {

using columnstore::Column;
using columnstore::ColumnBatch;
using columnstore::ColumnDef;
using columnstore::ColumnKind;

namespace {

constexpr uint64_t kCities = 100;
constexpr uint64_t kWords = 400;

struct Rng {
  std::mt19937_64 gen;
  uint64_t below(uint64_t n) { return n == 0 ? 0 : gen() % n; }
  bool chance(uint64_t percent) { return below(100) < percent; }
};

std::string words(Rng& rng, const char* prefix, uint64_t min, uint64_t max, char sep) {
  std::string out;
  for (uint64_t i = 0, n = min + rng.below(max - min + 1); i < n; ++i) {
    if (i > 0) out.push_back(sep);
    out += prefix + std::to_string(rng.below(kWords));
  }
  return out;
}

uint64_t user_count(uint64_t instances) { return std::max<uint64_t>(1, instances / 8); }
uint64_t ad_count(uint64_t instances) { return std::max<uint64_t>(1, instances / 20); }

ColumnBatch impressions(Rng& rng, uint64_t n) {
  const uint64_t users = user_count(n);
  std::vector<int64_t> id(n), user(n), ad(n), click(n), hour(n);
  std::vector<std::string> query(n), ctx(n);
  std::vector<bool> query_null(n), ctx_null(n);
  for (uint64_t i = 0; i < n; ++i) {
    // Multiplying by an odd constant is a bijection on 64-bit values.
    id[i] = static_cast<int64_t>((i + 1) * 0x9E3779B97F4A7C15ULL);
    // A few ids point past the users view so the join drops them.
    user[i] = static_cast<int64_t>(rng.below(users + users / 16 + 1));
    ad[i] = static_cast<int64_t>(rng.below(ad_count(n)));
    click[i] = rng.chance(18) ? 1 : 0;
    hour[i] = static_cast<int64_t>(rng.below(24));
    query_null[i] = rng.chance(5);
    if (!query_null[i]) query[i] = words(rng, "w", 1, 6, ' ');
    uint64_t kind = rng.below(100);
    if (kind < 3) {
      ctx[i] = "{\"u\": {\"city\": \"c" + std::to_string(rng.below(kCities));  // truncated
    } else if (kind < 7) {
      ctx_null[i] = true;
    } else {
      nlohmann::ordered_json doc;
      if (kind >= 12) doc["u"]["city"] = "c" + std::to_string(rng.below(kCities));
      doc["u"]["os"] = rng.chance(50) ? "ios" : "android";
      doc["pos"] = rng.below(10);
      ctx[i] = doc.dump();
    }
  }
  return ColumnBatch({Column::of_int64("instance_id", id), Column::of_int64("user_id", user),
                      Column::of_int64("ad_id", ad), Column::of_int64("click", click),
                      Column::of_strings("query", ColumnKind::kUtf8, query, query_null),
                      Column::of_strings("ctx", ColumnKind::kJson, ctx, ctx_null),
                      Column::of_int64("hour", hour)},
                     {"instance_id"});
}

ColumnBatch users(Rng& rng, uint64_t n) {
  std::vector<int64_t> id, age;
  std::vector<bool> age_null, gender_null;
  std::vector<std::string> gender, interests;
  for (uint64_t u = 0; n > 0 && u < user_count(n); ++u) {
    if (u % 17 == 16) continue;
    id.push_back(static_cast<int64_t>(u));
    age_null.push_back(rng.chance(10));
    age.push_back(age_null.back() ? 0 : static_cast<int64_t>(13 + rng.below(58)));
    gender_null.push_back(rng.chance(5));
    gender.push_back(gender_null.back() ? "" : (rng.chance(50) ? "m" : "f"));
    interests.push_back(rng.chance(10) ? "" : words(rng, "i", 1, 5, ','));
  }
  return ColumnBatch({Column::of_int64("user_id", id), Column::of_int64("age", age, age_null),
                      Column::of_strings("gender", ColumnKind::kUtf8, gender, gender_null),
                      Column::of_strings("interests", ColumnKind::kUtf8, interests)},
                     {"user_id"});
}

ColumnBatch ads(Rng& rng, uint64_t n) {
  std::vector<int64_t> id, category;
  std::vector<std::string> ad_words;
  for (uint64_t a = 0; n > 0 && a < ad_count(n); ++a) {
    id.push_back(static_cast<int64_t>(a));
    category.push_back(static_cast<int64_t>(rng.below(30)));
    ad_words.push_back(words(rng, "k", 2, 5, ' '));
  }
  return ColumnBatch({Column::of_int64("ad_id", id), Column::of_int64("category", category),
                      Column::of_strings("ad_words", ColumnKind::kUtf8, ad_words)},
                     {"ad_id"});
}

ColumnBatch user_extension(Rng& rng, uint64_t n, size_t view) {
  std::vector<int64_t> id, level;
  for (uint64_t u = 0; n > 0 && u < user_count(n); ++u) {
    id.push_back(static_cast<int64_t>(u));
    level.push_back(static_cast<int64_t>(rng.below(8)));
  }
  return ColumnBatch({Column::of_int64("user_id", id), Column::of_int64("ext" + std::to_string(view) + "_level", level)},
                     {"user_id"});
}

ColumnBatch basic(Rng& rng, const ColumnBatch& impressions) {
  const uint64_t n = impressions.row_count();
  std::vector<int64_t> hist(n), pos(n);
  std::vector<bool> pos_null(n);
  for (uint64_t i = 0; i < n; ++i) {
    hist[i] = static_cast<int64_t>(rng.gen());
    pos_null[i] = rng.chance(10);
    if (!pos_null[i]) pos[i] = static_cast<int64_t>(rng.below(1000));
  }
  return ColumnBatch({impressions.column("instance_id"), Column::of_int64("b_hist", hist),
                      Column::of_int64("b_pos", pos, pos_null)},
                     {"instance_id"});
}

nlohmann::ordered_json call(const std::string& function, std::vector<std::string> args, const std::string& out,
                            nlohmann::ordered_json params = nlohmann::ordered_json::object()) {
  nlohmann::ordered_json j;
  j["function"] = function;
  j["args"] = std::move(args);
  j["out"] = out;
  if (!params.empty()) j["params"] = std::move(params);
  return j;
}

nlohmann::ordered_json op(const std::string& name, nlohmann::ordered_json body,
                          std::vector<nlohmann::ordered_json> pre = {}, std::vector<nlohmann::ordered_json> post = {}) {
  nlohmann::ordered_json j;
  j["name"] = name;
  if (!pre.empty()) j["pre"] = std::move(pre);
  j["body"] = std::move(body);
  if (!post.empty()) j["post"] = std::move(post);
  return j;
}

nlohmann::ordered_json pipeline_json(const CorpusOptions& options) {
  using nlohmann::ordered_json;
  ordered_json cfg;
  ordered_json views = ordered_json::array();
  {
    ordered_json v;
    v["name"] = "impressions";
    v["path"] = "impressions.fbxc";
    v["clean"]["fills"]["query"] = "";
    v["clean"]["extract"] = ordered_json::array(
        {{{"source", "ctx"}, {"path", "u.city"}, {"output", "city"}, {"kind", "utf8"}},
         {{"source", "ctx"}, {"path", "pos"}, {"output", "pos"}, {"kind", "int64"}}});
    v["clean"]["filter"] = "hour != 3";
    views.push_back(v);
  }
  if (options.views >= 2) {
    ordered_json v;
    v["name"] = "users";
    v["path"] = "users.fbxc";
    v["clean"]["fills"]["age"] = 0;
    v["clean"]["fills"]["gender"] = "u";
    v["join_keys"] = {"user_id"};
    views.push_back(v);
  }
  if (options.views >= 3) {
    views.push_back({{"name", "ads"}, {"path", "ads.fbxc"}, {"join_keys", {"ad_id"}}});
  }
  for (size_t k = 4; k <= options.views; ++k) {
    std::string name = "user_ext" + std::to_string(k);
    views.push_back({{"name", name}, {"path", name + ".fbxc"}, {"join_keys", {"user_id"}}});
  }
  cfg["views"] = views;
  cfg["basic"]["path"] = "basic.fbxc";
  cfg["basic"]["features"] = ordered_json::array({{{"column", "b_hist"}, {"slot", 100}}, {{"column", "b_pos"}, {"slot", 101}}});
  cfg["label_column"] = "click";

  ordered_json ops = ordered_json::array();
  std::vector<std::string> features;
  ops.push_back(op("query_terms", call("hash_tokens", {"query_tok"}, "f_query", {{"slot", 1}}),
                   {call("split", {"query"}, "query_tok", {{"delim", " "}})}));
  features.push_back("f_query");
  // A large lookup table: kept off the device by its footprint.
  auto city = op("city_lookup", call("dict_lookup", {"city"}, "city_id", {{"table", "dict.tsv"}, {"default", 0}}));
  city["footprint_bytes"] = uint64_t{32} << 30;
  city["kind"] = "memory";
  ops.push_back(city);
  ops.push_back(op("city_hour", call("hash_combine", {"city_id", "hour"}, "f_city_hour", {{"slot", 2}})));
  features.push_back("f_city_hour");
  if (options.views >= 2) {
    ops.push_back(op("age_gender", call("hash_combine", {"age_bucket", "gender"}, "f_age_gender", {{"slot", 3}}),
                     {call("bucketize", {"age"}, "age_bucket", {{"boundaries", "18,25,35,50,65"}})}));
    ops.push_back(op("interests", call("hash_tokens", {"interest_tok"}, "f_interests", {{"slot", 4}}),
                     {call("split", {"interests"}, "interest_tok", {{"delim", ","}})},
                     {call("cross", {"f_interests", "ad_id"}, "f_interest_ad", {{"slot", 5}})}));
    features.insert(features.end(), {"f_age_gender", "f_interests", "f_interest_ad"});
  }
  if (options.views >= 3) {
    ops.push_back(op("ad_words", call("hash_tokens", {"ad_tok"}, "f_ad_words", {{"slot", 6}}),
                     {call("split", {"ad_words"}, "ad_tok", {{"delim", " "}})},
                     {call("cross", {"f_ad_words", "city"}, "f_ad_city", {{"slot", 7}})}));
    features.insert(features.end(), {"f_ad_words", "f_ad_city"});
  }
  for (size_t k = 4; k <= options.views; ++k) {
    std::string col = "ext" + std::to_string(k) + "_level";
    std::string f = "f_ext" + std::to_string(k);
    ops.push_back(op("ext" + std::to_string(k), call("hash_combine", {col}, f, {{"slot", 10 + k}})));
    features.push_back(f);
  }
  cfg["operators"] = ops;
  cfg["features"] = features;
  cfg["batch_size"] = options.batch_size;
  cfg["mode"] = "pipelined";
  cfg["device"] = {{"memory_bytes", uint64_t{16} << 30}, {"pool_bytes", uint64_t{64} << 20},
                   {"lanes_per_group", 256}, {"groups", 4}, {"h2d_bytes_per_sec", 12e9},
                   {"launch_overhead_us", 3.45}, {"fused", true}};
  cfg["host_workers"] = 4;
  cfg["queue_depth"] = 4;
  cfg["staging_dir"] = "staging";
  return cfg;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw IoError("cannot write '" + path.string() + "'");
}

}  // namespace

std::vector<CorpusView> corpus_layout(size_t views) {
  std::vector<CorpusView> out;
  out.push_back({"impressions",
                 {{"instance_id", ColumnKind::kInt64},
                  {"user_id", ColumnKind::kInt64},
                  {"ad_id", ColumnKind::kInt64},
                  {"click", ColumnKind::kInt64},
                  {"query", ColumnKind::kUtf8},
                  {"ctx", ColumnKind::kJson},
                  {"hour", ColumnKind::kInt64}}});
  if (views >= 2) {
    out.push_back({"users",
                   {{"user_id", ColumnKind::kInt64},
                    {"age", ColumnKind::kInt64},
                    {"gender", ColumnKind::kUtf8},
                    {"interests", ColumnKind::kUtf8}}});
  }
  if (views >= 3) {
    out.push_back(
        {"ads", {{"ad_id", ColumnKind::kInt64}, {"category", ColumnKind::kInt64}, {"ad_words", ColumnKind::kUtf8}}});
  }
  for (size_t k = 4; k <= views; ++k) {
    out.push_back({"user_ext" + std::to_string(k),
                   {{"user_id", ColumnKind::kInt64}, {"ext" + std::to_string(k) + "_level", ColumnKind::kInt64}}});
  }
  return out;
}

std::vector<ColumnDef> basic_layout() {
  return {{"instance_id", ColumnKind::kInt64}, {"b_hist", ColumnKind::kInt64}, {"b_pos", ColumnKind::kInt64}};
}

CorpusManifest generate_corpus(const CorpusOptions& options) {
  if (options.views == 0) throw ConfigError("a corpus needs at least one view");
  if (options.batch_size == 0) throw ConfigError("batch_size must be at least 1");
  std::error_code ec;
  std::filesystem::create_directories(options.out, ec);
  if (ec) throw IoError("cannot create '" + options.out.string() + "': " + ec.message());

  // Each table draws from its own stream so adding views leaves the others
  // unchanged.
  auto stream = [&](uint64_t k) { return Rng{std::mt19937_64(options.seed * 1000003 + k)}; };
  CorpusManifest manifest;
  auto emit = [&](const ColumnBatch& batch, const std::string& file) {
    manifest.files.push_back(options.out / file);
    columnstore::write_view(batch, manifest.files.back());
  };

  auto r0 = stream(0);
  auto imp = impressions(r0, options.instances);
  emit(imp, "impressions.fbxc");
  if (options.views >= 2) {
    auto r = stream(1);
    emit(users(r, options.instances), "users.fbxc");
  }
  if (options.views >= 3) {
    auto r = stream(2);
    emit(ads(r, options.instances), "ads.fbxc");
  }
  for (size_t k = 4; k <= options.views; ++k) {
    auto r = stream(k);
    emit(user_extension(r, options.instances, k), "user_ext" + std::to_string(k) + ".fbxc");
  }
  auto rb = stream(99);
  emit(basic(rb, imp), "basic.fbxc");

  std::string dict;
  auto rd = stream(100);
  for (uint64_t c = 0; c < kCities; ++c) dict += "c" + std::to_string(c) + "\t" + std::to_string(1 + rd.below(1 << 20)) + "\n";
  manifest.files.push_back(options.out / "dict.tsv");
  write_text(manifest.files.back(), dict);

  manifest.config = options.out / "pipeline.json";
  write_text(manifest.config, pipeline_json(options).dump(2) + "\n");
  return manifest;
}

}  // namespace featurebox::pipeline
