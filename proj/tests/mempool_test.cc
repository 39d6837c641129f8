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

#include <algorithm>
#include <random>
#include <thread>
#include <vector>

#include "featurebox/mempool/arena_pool.h"

namespace featurebox::mempool {
namespace {

// Sequential bump allocator written independently of ArenaPool.
struct BumpOracle {
  uint64_t head = 0;
  std::vector<uint64_t> allocate(const std::vector<uint64_t>& sizes) {
    std::vector<uint64_t> offs;
    uint64_t cur = head;
    for (uint64_t s : sizes) {
      offs.push_back(cur);
      cur += s;
    }
    uint64_t used = cur - head;
    uint64_t rounded = used % 128 == 0 ? used : used + (128 - used % 128);
    if (used > 0) head += rounded;
    return offs;
  }
};

TEST(PrefixTest, Examples) {
  std::vector<uint64_t> a{3, 5, 2};
  auto r = exclusive_prefix(a);
  EXPECT_EQ(r.prefix, (std::vector<uint64_t>{0, 3, 8}));
  EXPECT_EQ(r.total, 10u);

  std::vector<uint64_t> z{0, 0, 0};
  r = exclusive_prefix(z);
  EXPECT_EQ(r.prefix, (std::vector<uint64_t>{0, 0, 0}));
  EXPECT_EQ(r.total, 0u);

  std::vector<uint64_t> one{7};
  r = exclusive_prefix(one);
  EXPECT_EQ(r.prefix, (std::vector<uint64_t>{0}));
  EXPECT_EQ(r.total, 7u);
}

TEST(ArenaPoolTest, CreatePool) {
  ArenaPool pool(4096);
  EXPECT_EQ(pool.head(), 0u);
  EXPECT_EQ(pool.remaining(), 4096u);
  EXPECT_THROW(ArenaPool(100), Error);
  EXPECT_THROW(ArenaPool(0), Error);

  ArenaPool other(4096);
  std::vector<uint64_t> s{1};
  pool.group_allocate(s);
  EXPECT_EQ(pool.head(), 128u);
  EXPECT_EQ(other.head(), 0u);
}

TEST(ArenaPoolTest, GroupAllocatePacksLanesAndAlignsGroup) {
  ArenaPool pool(4096);
  std::vector<uint64_t> s{3, 5, 2};
  auto g = pool.group_allocate(s);
  EXPECT_EQ(g.offsets, (std::vector<uint64_t>{0, 3, 8}));
  EXPECT_EQ(g.group_base, 0u);
  EXPECT_EQ(g.group_total, 128u);
  EXPECT_EQ(pool.head(), 128u);
  EXPECT_EQ(pool.head_advances(), 1u);
}

TEST(ArenaPoolTest, ZeroTotalGroupConsumesNothing) {
  ArenaPool pool(4096);
  std::vector<uint64_t> first{200};
  pool.group_allocate(first);
  std::vector<uint64_t> s{0, 0};
  auto g = pool.group_allocate(s);
  EXPECT_EQ(g.offsets, (std::vector<uint64_t>{256, 256}));
  EXPECT_EQ(pool.head(), 256u);
  EXPECT_EQ(pool.head_advances(), 1u);
}

TEST(ArenaPoolTest, ResetReturnsToStart) {
  ArenaPool pool(4096);
  pool.reset();
  EXPECT_EQ(pool.head(), 0u);
  std::vector<uint64_t> a{128};
  pool.group_allocate(a);
  pool.reset();
  EXPECT_EQ(pool.head(), 0u);
  std::vector<uint64_t> b{5};
  EXPECT_EQ(pool.group_allocate(b).offsets.front(), 0u);
}

TEST(ArenaPoolTest, ExhaustionLeavesHeadUnchanged) {
  ArenaPool pool(1024);
  std::vector<uint64_t> a{700};
  pool.group_allocate(a);
  std::vector<uint64_t> big{100, 300};
  try {
    pool.group_allocate(big);
    FAIL() << "expected exhaustion";
  } catch (const PoolExhaustedError& e) {
    EXPECT_EQ(e.requested(), 512u);
    EXPECT_EQ(e.remaining(), 256u);
  }
  EXPECT_EQ(pool.head(), 768u);
  std::vector<uint64_t> small{200};
  EXPECT_EQ(pool.group_allocate(small).group_base, 768u);
  EXPECT_EQ(pool.head(), 1024u);
}

TEST(ArenaPoolPropertyTest, MatchesSequentialOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    ArenaPool pool(1 << 22);
    BumpOracle oracle;
    for (int g = 0; g < 50; ++g) {
      std::vector<uint64_t> sizes(1 + rng() % 64);
      for (auto& s : sizes) s = rng() % 4 == 0 ? 0 : rng() % 300;
      auto grant = pool.group_allocate(sizes);
      ASSERT_EQ(grant.offsets, oracle.allocate(sizes));
      ASSERT_EQ(pool.head(), oracle.head);
      ASSERT_EQ(grant.group_base % 128, 0u);
    }
  }
}

TEST(ArenaPoolConcurrencyTest, TwoGroupsGetDistinctAlignedBases) {
  for (int trial = 0; trial < 500; ++trial) {
    ArenaPool pool(4096);
    GroupGrant g1, g2;
    std::vector<uint64_t> s1{4, 6};
    std::vector<uint64_t> s2{10, 10};
    std::thread t1([&] { g1 = pool.group_allocate(s1); });
    std::thread t2([&] { g2 = pool.group_allocate(s2); });
    t1.join();
    t2.join();
    std::vector<uint64_t> bases{g1.group_base, g2.group_base};
    std::sort(bases.begin(), bases.end());
    ASSERT_EQ(bases, (std::vector<uint64_t>{0, 128}));
    ASSERT_EQ(pool.head(), 256u);
    ASSERT_EQ(pool.head_advances(), 2u);
  }
}

TEST(ArenaPoolConcurrencyTest, ConcurrentExhaustionNeverOvershoots) {
  for (int trial = 0; trial < 50; ++trial) {
    ArenaPool pool(128 * 64);
    std::atomic<int> ok{0};
    std::atomic<int> failed{0};
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t) {
      threads.emplace_back([&] {
        std::vector<uint64_t> s{100, 100};  // 256 bytes per group
        for (int i = 0; i < 10; ++i) {
          try {
            pool.group_allocate(s);
            ++ok;
          } catch (const PoolExhaustedError&) {
            ++failed;
          }
          EXPECT_LE(pool.head(), pool.capacity());
        }
      });
    }
    for (auto& t : threads) t.join();
    EXPECT_EQ(ok.load(), 32);
    EXPECT_EQ(failed.load(), 48);
    EXPECT_EQ(pool.head(), pool.capacity());
  }
}

}  // namespace
}  // namespace featurebox::mempool
