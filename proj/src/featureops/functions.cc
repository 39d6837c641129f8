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

#include "featurebox/featureops/functions.h"

#include <charconv>
#include <fstream>

#include "featurebox/common/error.h"
#include "featurebox/common/hash.h"

namespace featurebox::featureops {

std::vector<std::string> split_string(std::string_view s, char delimiter) {
  std::vector<std::string> out;
  size_t start = 0;
  for (;;) {
    size_t pos = s.find(delimiter, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

size_t count_tokens(std::string_view s, char delimiter) {
  size_t n = 1;
  for (char c : s) n += c == delimiter;
  return n;
}

FeatureSign hash_combine(std::span<const std::string_view> values, uint16_t slot) {
  Fnv1a64 h;
  h.update_byte(static_cast<uint8_t>(slot >> 8)).update_byte(static_cast<uint8_t>(slot & 0xFF));
  for (size_t i = 0; i < values.size(); ++i) {
    if (i > 0) h.update_byte(0x00);
    h.update(values[i]);
  }
  return {slot, h.digest()};
}

FeatureSign hash_combine(std::initializer_list<std::string_view> values, uint16_t slot) {
  return hash_combine(std::span<const std::string_view>(values.begin(), values.size()), slot);
}

std::string encode_sign_list(std::span<const FeatureSign> signs) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(signs.size() * 22);
  for (size_t i = 0; i < signs.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += std::to_string(signs[i].slot);
    out.push_back(':');
    for (int nib = 15; nib >= 0; --nib) out.push_back(kHex[(signs[i].sign >> (4 * nib)) & 0xF]);
  }
  return out;
}

std::vector<FeatureSign> decode_sign_list(std::string_view text) {
  std::vector<FeatureSign> out;
  if (text.empty()) return out;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find(' ', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view entry = text.substr(start, end - start);
    size_t colon = entry.find(':');
    FeatureSign fs;
    if (colon == std::string_view::npos ||
        std::from_chars(entry.data(), entry.data() + colon, fs.slot).ptr != entry.data() + colon ||
        entry.size() - colon - 1 != 16 ||
        std::from_chars(entry.data() + colon + 1, entry.data() + entry.size(), fs.sign, 16).ptr !=
            entry.data() + entry.size()) {
      throw FormatError("malformed sign list entry '" + std::string(entry) + "'");
    }
    out.push_back(fs);
    start = end + 1;
  }
  return out;
}

DictTable::DictTable(std::unordered_map<std::string, uint64_t> entries, uint64_t default_value)
    : entries_(entries.begin(), entries.end()), default_(default_value) {}

DictTable DictTable::load(const std::filesystem::path& path, uint64_t default_value) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read dictionary table '" + path.string() + "'");
  DictTable t;
  t.default_ = default_value;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    uint64_t v = 0;
    if (tab == std::string::npos ||
        std::from_chars(line.data() + tab + 1, line.data() + line.size(), v).ptr !=
            line.data() + line.size() ||
        tab + 1 == line.size()) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": expected 'key<TAB>u64'");
    }
    t.entries_[line.substr(0, tab)] = v;
  }
  return t;
}

uint64_t DictTable::lookup(std::string_view key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? default_ : it->second;
}

uint64_t DictTable::byte_size() const {
  uint64_t bytes = 0;
  for (const auto& [k, v] : entries_) bytes += k.size() + sizeof(v) + 32;
  return bytes;
}

}  // namespace featurebox::featureops
