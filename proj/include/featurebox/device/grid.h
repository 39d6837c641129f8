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
#include <functional>
#include <span>
#include <vector>

#include "featurebox/common/worker_pool.h"
#include "featurebox/mempool/arena_pool.h"

namespace featurebox::device {

// Lane body: (lane index within the grid, this lane's slice of pool memory).
using LaneBody = std::function<void(size_t lane, std::span<std::byte> memory)>;
using LaneSize = std::function<uint64_t(size_t lane)>;

// One work-group: lanes report their dynamic allocation sizes, the group
// takes its memory with a single cursor advance, then every lane runs
// against its own slice. `first_lane` offsets the lane index passed to the
// body. Lane sizes past the pool's capacity propagate PoolExhaustedError.
mempool::GroupGrant run_device_group(mempool::ArenaPool& pool,
                                     std::span<const uint64_t> lane_sizes,
                                     const LaneBody& body, size_t first_lane = 0);

// Simulated wide-parallel device: work-groups of `lanes_per_group` lanes
// dispatched onto a worker pool, allocating from a shared arena.
class DeviceGrid {
 public:
  DeviceGrid(size_t lanes_per_group, WorkerPool& workers, mempool::ArenaPool& pool);

  size_t lanes_per_group() const { return lanes_per_group_; }
  mempool::ArenaPool& pool() { return pool_; }

  // Covers `lanes` lanes with ceil(lanes / lanes_per_group) groups. Groups
  // run concurrently; lanes within a group run in lane order.
  void launch(size_t lanes, const LaneSize& size_of, const LaneBody& body);

  // Lanes without dynamic memory.
  void launch(size_t lanes, const std::function<void(size_t lane)>& body);

 private:
  size_t lanes_per_group_;
  WorkerPool& workers_;
  mempool::ArenaPool& pool_;
};

}  // namespace featurebox::device
