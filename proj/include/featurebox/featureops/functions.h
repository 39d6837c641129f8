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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace featurebox::featureops {

// A categorical feature value inside a slot of the sparse input space.
struct FeatureSign {
  uint16_t slot = 0;
  uint64_t sign = 0;

  auto operator<=>(const FeatureSign& o) const {
    if (auto c = sign <=> o.sign; c != 0) return c;
    return slot <=> o.slot;
  }
  bool operator==(const FeatureSign&) const = default;
};

// k delimiters always produce k + 1 tokens, so split("") == {""}.
std::vector<std::string> split_string(std::string_view s, char delimiter);

// Number of tokens split_string would return.
size_t count_tokens(std::string_view s, char delimiter);

// FNV-1a-64 over: slot (big-endian u16), then the values separated by a
// single 0x00 byte. Order-sensitive.
FeatureSign hash_combine(std::span<const std::string_view> values, uint16_t slot);
FeatureSign hash_combine(std::initializer_list<std::string_view> values, uint16_t slot);

// Text form of a sign list as stored in Utf8 feature columns:
// "<slot>:<16 hex digits>" entries separated by single spaces.
std::string encode_sign_list(std::span<const FeatureSign> signs);
std::vector<FeatureSign> decode_sign_list(std::string_view text);

// Read-only key -> u64 table, loaded from "key<TAB>u64" lines.
class DictTable {
 public:
  DictTable() = default;
  DictTable(std::unordered_map<std::string, uint64_t> entries, uint64_t default_value);

  // Throws IoError if unreadable, FormatError on a malformed line.
  static DictTable load(const std::filesystem::path& path, uint64_t default_value = 0);

  uint64_t lookup(std::string_view key) const;
  size_t size() const { return entries_.size(); }
  uint64_t default_value() const { return default_; }
  // Approximate resident size: key bytes plus per-entry overhead.
  uint64_t byte_size() const;

 private:
  struct Hash {
    using is_transparent = void;
    size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  std::unordered_map<std::string, uint64_t, Hash, std::equal_to<>> entries_;
  uint64_t default_ = 0;
};

}  // namespace featurebox::featureops
