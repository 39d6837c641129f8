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

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "featurebox/columnstore/column_batch.h"

namespace featurebox::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("featurebox_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string random_text(std::mt19937_64& rng, size_t max_len,
                               std::string_view alphabet = "abcdefghij ,") {
  std::string s(rng() % (max_len + 1), ' ');
  for (auto& ch : s) ch = alphabet[rng() % alphabet.size()];
  return s;
}

// Random batch with one column of every kind, ~20% nulls.
inline columnstore::ColumnBatch random_batch(std::mt19937_64& rng, size_t rows) {
  using columnstore::Column;
  using columnstore::ColumnKind;
  Column a("a", ColumnKind::kInt64);
  Column b("b", ColumnKind::kFloat32);
  Column c("c", ColumnKind::kUtf8);
  Column d("d", ColumnKind::kJson);
  auto maybe_null = [&] { return rng() % 5 == 0; };
  for (size_t i = 0; i < rows; ++i) {
    if (maybe_null()) a.append_null(); else a.append_int64(static_cast<int64_t>(rng()));
    if (maybe_null()) b.append_null(); else b.append_float32(static_cast<float>(rng() % 1000) / 7.0f);
    if (maybe_null()) c.append_null(); else c.append_string(random_text(rng, 12));
    if (maybe_null()) d.append_null(); else d.append_string("{\"k\":" + std::to_string(rng() % 100) + "}");
  }
  return columnstore::ColumnBatch({a, b, c, d}, {"a"});
}

}  // namespace featurebox::testing
