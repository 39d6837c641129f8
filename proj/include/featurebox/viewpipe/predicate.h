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

#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "featurebox/columnstore/column_batch.h"

namespace featurebox::viewpipe {

// Row filter expressions, e.g.
//   age >= 18 && (city == "sf" || city == 'nyc') && !(score < 0.5)
// Comparisons take a column on the left and a literal on the right. A null
// cell makes its comparison false.
class Predicate {
 public:
  enum class Op { kEq, kNe, kLt, kLe, kGt, kGe };
  using Literal = std::variant<int64_t, double, std::string>;

  // Throws ConfigError on syntax errors.
  static Predicate parse(std::string_view text);

  // Columns referenced anywhere in the expression.
  std::vector<std::string> columns() const;

  // Evaluates every row; throws SchemaError for unknown columns or
  // literal/column kind mismatches.
  std::vector<bool> evaluate(const columnstore::ColumnBatch& batch) const;

  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace featurebox::viewpipe
