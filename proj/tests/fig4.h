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

#include <map>
#include <string>
#include <vector>

#include "featurebox/featureops/operator_spec.h"

namespace featurebox::testing {

// The three-operator example: Op1 post-calls Func3, Op2 pre-calls Func1 and
// post-calls Func3, Op3 pre-calls Func2 and post-calls Func3. Func2 is a
// large table lookup; `func2_footprint` controls its memory estimate.
inline std::vector<featureops::OperatorSpec> fig4_specs(uint64_t func2_footprint = 1024) {
  using featureops::FunctionRef;
  using featureops::OperatorSpec;
  OperatorSpec op1{"Op1", {}, {}, {}, {FunctionRef{"Func3"}}, FunctionRef{"Op1Body"}, 1024};
  OperatorSpec op2{"Op2", {}, {}, {FunctionRef{"Func1"}}, {FunctionRef{"Func3"}}, FunctionRef{"Op2Body"}, 1024};
  FunctionRef func2{"Func2"};
  func2.footprint_bytes = func2_footprint;
  OperatorSpec op3{"Op3", {}, {}, {func2}, {FunctionRef{"Func3"}}, FunctionRef{"Op3Body"}, 1024};
  return {op1, op2, op3};
}

// Expanded node name -> the example's numbering of fine-grained operators.
inline std::map<std::string, std::string> fig4_labels() {
  return {{"Op1", "Op1"},
          {"Op2", "Op2"},
          {"Op3", "Op3"},
          {"Op2.pre0.Func1", "Op4"},
          {"Op3.pre0.Func2", "Op5"},
          {"Op1.post0.Func3", "Op6"},
          {"Op2.post0.Func3", "Op7"},
          {"Op3.post0.Func3", "Op8"}};
}

}  // namespace featurebox::testing
