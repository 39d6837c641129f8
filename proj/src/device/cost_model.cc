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

#include "featurebox/device/cost_model.h"

#include <array>

#include "featurebox/common/error.h"

namespace featurebox::device {

LaunchCostModel calibrate_launch_overhead(std::span<const LaunchMeasurement> measurements) {
  if (measurements.size() < 2) throw ConfigError("calibration needs at least two measurements");
  double cc = 0;
  double ct = 0;
  for (const auto& m : measurements) {
    if (m.count == 0) throw ConfigError("calibration launch counts must be positive");
    double c = static_cast<double>(m.count);
    cc += c * c;
    ct += c * m.total_us;
  }
  LaunchCostModel model;
  model.per_launch_overhead_us = ct / cc;
  model.measurements.assign(measurements.begin(), measurements.end());
  if (!(model.per_launch_overhead_us > 0)) throw ConfigError("calibrated launch overhead is not positive");
  return model;
}

std::span<const LaunchMeasurement> reference_launch_table() {
  static constexpr std::array<LaunchMeasurement, 5> kTable{{
      {1, 4}, {10, 35}, {100, 360}, {1000, 3619}, {10000, 34515},
  }};
  return kTable;
}

}  // namespace featurebox::device
