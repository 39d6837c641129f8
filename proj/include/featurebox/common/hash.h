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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace featurebox {

inline constexpr uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr uint64_t kFnvPrime = 0x100000001b3ULL;

// Incremental 64-bit FNV-1a.
class Fnv1a64 {
 public:
  Fnv1a64& update(std::span<const std::byte> bytes) {
    for (std::byte b : bytes) {
      state_ ^= static_cast<uint64_t>(b);
      state_ *= kFnvPrime;
    }
    return *this;
  }
  Fnv1a64& update(std::string_view s) {
    return update(std::as_bytes(std::span(s.data(), s.size())));
  }
  Fnv1a64& update_byte(uint8_t b) {
    state_ ^= b;
    state_ *= kFnvPrime;
    return *this;
  }
  Fnv1a64& update_u64_le(uint64_t v) {
    for (int i = 0; i < 8; ++i) update_byte(static_cast<uint8_t>(v >> (8 * i)));
    return *this;
  }
  uint64_t digest() const { return state_; }

 private:
  uint64_t state_ = kFnvOffsetBasis;
};

}  // namespace featurebox
