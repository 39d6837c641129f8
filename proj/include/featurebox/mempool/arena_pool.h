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

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "featurebox/common/error.h"

namespace featurebox::mempool {

inline constexpr uint64_t kGroupAlignment = 128;

constexpr uint64_t round_up_128(uint64_t n) {
  return (n + kGroupAlignment - 1) & ~(kGroupAlignment - 1);
}

class PoolExhaustedError : public Error {
 public:
  PoolExhaustedError(uint64_t requested, uint64_t remaining);
  uint64_t requested() const { return requested_; }
  uint64_t remaining() const { return remaining_; }

 private:
  uint64_t requested_;
  uint64_t remaining_;
};

struct PrefixSums {
  std::vector<uint64_t> prefix;  // prefix[0] = 0, prefix[i] = sum of sizes[0..i)
  uint64_t total = 0;
};

// Exclusive scan over per-lane request sizes.
PrefixSums exclusive_prefix(std::span<const uint64_t> sizes);

struct GroupGrant {
  std::vector<uint64_t> offsets;  // per lane, from the pool base
  uint64_t group_base = 0;
  uint64_t group_total = 0;  // bytes consumed, a multiple of 128
};

// Pre-allocated region with a single bump cursor (idle_memory_head). A
// work-group allocates for all of its lanes with one atomic cursor advance;
// memory is only ever released wholesale by reset().
class ArenaPool {
 public:
  // Throws Error if capacity is zero or not a multiple of 128.
  explicit ArenaPool(uint64_t capacity_bytes);

  ArenaPool(const ArenaPool&) = delete;
  ArenaPool& operator=(const ArenaPool&) = delete;

  uint64_t capacity() const { return capacity_; }
  uint64_t head() const { return head_.load(std::memory_order_acquire); }
  uint64_t remaining() const { return capacity_ - head(); }

  // Lane i receives [offsets[i], offsets[i] + sizes[i]). Safe to call
  // concurrently. On exhaustion throws PoolExhaustedError and leaves the
  // cursor untouched.
  GroupGrant group_allocate(std::span<const uint64_t> sizes);

  // Requires quiescence: no group_allocate may be in flight.
  void reset() { head_.store(0, std::memory_order_release); }

  std::span<std::byte> bytes(uint64_t offset, uint64_t length);
  std::span<const std::byte> bytes(uint64_t offset, uint64_t length) const;

  // Successful cursor advances since construction; exactly one per
  // non-empty group.
  uint64_t head_advances() const { return advances_.load(std::memory_order_relaxed); }

 private:
  struct AlignedDelete {
    void operator()(std::byte* p) const { ::operator delete[](p, std::align_val_t{kGroupAlignment}); }
  };

  uint64_t capacity_;
  std::unique_ptr<std::byte[], AlignedDelete> base_;
  std::atomic<uint64_t> head_{0};
  std::atomic<uint64_t> advances_{0};
};

}  // namespace featurebox::mempool
