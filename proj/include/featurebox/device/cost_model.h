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
#include <span>
#include <vector>

namespace featurebox::device {

struct LaunchMeasurement {
  uint64_t count = 0;
  double total_us = 0;

  bool operator==(const LaunchMeasurement&) const = default;
};

struct LaunchCostModel {
  double per_launch_overhead_us = 0;
  std::vector<LaunchMeasurement> measurements;
};

// Least-squares slope of total time against launch count, through the
// origin. Needs at least two measurements with positive counts; throws
// ConfigError otherwise.
LaunchCostModel calibrate_launch_overhead(std::span<const LaunchMeasurement> measurements);

// Empty-kernel launch timings measured on a V100-class accelerator
// (1, 10, 100, 1000 and 10000 back-to-back launches).
std::span<const LaunchMeasurement> reference_launch_table();

// Default per-launch overhead for the simulated device, in microseconds.
inline constexpr double kDefaultLaunchOverheadUs = 3.45;

}  // namespace featurebox::device
