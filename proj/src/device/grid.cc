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

#include "featurebox/device/grid.h"

#include <algorithm>

namespace featurebox::device {

mempool::GroupGrant run_device_group(mempool::ArenaPool& pool,
                                     std::span<const uint64_t> lane_sizes, const LaneBody& body,
                                     size_t first_lane) {
  if (lane_sizes.empty()) return {};
  auto grant = pool.group_allocate(lane_sizes);
  for (size_t i = 0; i < lane_sizes.size(); ++i) {
    body(first_lane + i, pool.bytes(grant.offsets[i], lane_sizes[i]));
  }
  return grant;
}

DeviceGrid::DeviceGrid(size_t lanes_per_group, WorkerPool& workers, mempool::ArenaPool& pool)
    : lanes_per_group_(std::max<size_t>(lanes_per_group, 1)), workers_(workers), pool_(pool) {}

void DeviceGrid::launch(size_t lanes, const LaneSize& size_of, const LaneBody& body) {
  const size_t groups = (lanes + lanes_per_group_ - 1) / lanes_per_group_;
  workers_.parallel_for(groups, [&](size_t g) {
    const size_t first = g * lanes_per_group_;
    const size_t count = std::min(lanes_per_group_, lanes - first);
    std::vector<uint64_t> sizes(count);
    for (size_t i = 0; i < count; ++i) sizes[i] = size_of(first + i);
    run_device_group(pool_, sizes, body, first);
  });
}

void DeviceGrid::launch(size_t lanes, const std::function<void(size_t lane)>& body) {
  const size_t groups = (lanes + lanes_per_group_ - 1) / lanes_per_group_;
  workers_.parallel_for(groups, [&](size_t g) {
    const size_t first = g * lanes_per_group_;
    const size_t last = std::min(first + lanes_per_group_, lanes);
    for (size_t lane = first; lane < last; ++lane) body(lane);
  });
}

}  // namespace featurebox::device
