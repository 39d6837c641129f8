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

#include "featurebox/mempool/arena_pool.h"

#include <new>
#include <string>

namespace featurebox::mempool {

PoolExhaustedError::PoolExhaustedError(uint64_t requested, uint64_t remaining)
    : Error("memory pool exhausted: requested " + std::to_string(requested) + " bytes, " +
            std::to_string(remaining) + " remaining"),
      requested_(requested),
      remaining_(remaining) {}

PrefixSums exclusive_prefix(std::span<const uint64_t> sizes) {
  PrefixSums out;
  out.prefix.resize(sizes.size());
  uint64_t running = 0;
  for (size_t i = 0; i < sizes.size(); ++i) {
    out.prefix[i] = running;
    running += sizes[i];
  }
  out.total = running;
  return out;
}

ArenaPool::ArenaPool(uint64_t capacity_bytes) : capacity_(capacity_bytes) {
  if (capacity_bytes == 0 || capacity_bytes % kGroupAlignment != 0) {
    throw Error("pool capacity " + std::to_string(capacity_bytes) +
                " must be a positive multiple of 128");
  }
  try {
    base_.reset(static_cast<std::byte*>(
        ::operator new[](capacity_bytes, std::align_val_t{kGroupAlignment})));
  } catch (const std::bad_alloc&) {
    throw Error("cannot reserve " + std::to_string(capacity_bytes) + " bytes for the pool");
  }
}

GroupGrant ArenaPool::group_allocate(std::span<const uint64_t> sizes) {
  PrefixSums sums = exclusive_prefix(sizes);
  GroupGrant grant;
  grant.group_total = round_up_128(sums.total);

  uint64_t base = head_.load(std::memory_order_acquire);
  if (grant.group_total > 0) {
    // Single linearizable advance: the CAS only commits when the whole
    // group fits, so the cursor never passes capacity.
    for (;;) {
      if (grant.group_total > capacity_ - base) {
        throw PoolExhaustedError(grant.group_total, capacity_ - base);
      }
      if (head_.compare_exchange_weak(base, base + grant.group_total,
                                      std::memory_order_acq_rel,
                                      std::memory_order_acquire)) {
        break;
      }
    }
    advances_.fetch_add(1, std::memory_order_relaxed);
  }
  grant.group_base = base;
  grant.offsets.resize(sizes.size());
  for (size_t i = 0; i < sizes.size(); ++i) grant.offsets[i] = base + sums.prefix[i];
  return grant;
}

std::span<std::byte> ArenaPool::bytes(uint64_t offset, uint64_t length) {
  if (offset > capacity_ || length > capacity_ - offset) throw Error("pool span out of range");
  return {base_.get() + offset, static_cast<size_t>(length)};
}

std::span<const std::byte> ArenaPool::bytes(uint64_t offset, uint64_t length) const {
  if (offset > capacity_ || length > capacity_ - offset) throw Error("pool span out of range");
  return {base_.get() + offset, static_cast<size_t>(length)};
}

}  // namespace featurebox::mempool
