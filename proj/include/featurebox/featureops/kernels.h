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

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "featurebox/device/grid.h"
#include "featurebox/featureops/frame.h"
#include "featurebox/featureops/operator_spec.h"

namespace featurebox::featureops {

struct KernelIO {
  std::vector<const FrameColumn*> inputs;  // parallel to FunctionRef::args
  FrameColumn* output = nullptr;
  size_t rows = 0;
  device::DeviceGrid* device = nullptr;  // null: run on the host
};

// A bound, stateless callable. Kernels must produce byte-identical output
// on the host and on the device.
using Kernel = std::function<void(KernelIO&)>;

// Builtin functions:
//   split(text)                   params: delim (one byte, default ",")  -> tokens
//   hash_tokens(tokens|text)      params: slot                           -> signs
//   hash_combine(scalar...)       params: slot                           -> signs (one per row)
//   cross(signs, scalar)          params: slot                           -> signs
//   dict_lookup(scalar)           params: table (path), default          -> int64
//   bucketize(int64|float32)      params: boundaries ("18,25,35")        -> int64
class FunctionLibrary {
 public:
  using Factory = std::function<Kernel(const FunctionRef&, const std::filesystem::path& base_dir)>;

  static const FunctionLibrary& builtin();

  void add(const std::string& name, Factory factory);
  bool contains(const std::string& name) const { return factories_.contains(name); }

  // Loads any resources the call needs (e.g. dictionary tables). Throws
  // ConfigError on unknown functions or bad parameters.
  Kernel bind(const FunctionRef& ref, const std::filesystem::path& base_dir = {}) const;

 private:
  std::map<std::string, Factory> factories_;
};

// Declared-size estimate for memory-bound calls: the dictionary file size
// for dict_lookup, nullopt for everything else.
std::optional<uint64_t> intrinsic_footprint(const FunctionRef& ref,
                                            const std::filesystem::path& base_dir);

}  // namespace featurebox::featureops
