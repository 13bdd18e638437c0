// Copyright 2026 The gesturespot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Model container, version 1. Line-oriented text:
//
//   gesturespot-model 1
//   strategy <voting|fsm|proposal|baseline>
//   thresholds <17 values>                      (optional)
//   config <n>                                   followed by n key=value lines
//   ensemble <role>
//     input <frames|baseline>
//     features <set>
//     axis <x> <y> <z>
//     topology <26 parent indices>
//     norm <mean x y z> <std x y z>
//     baseline <steps> <pair count> <pairs...> <palm a b c>
//     scaler <dim>                               then a mean row and an inv_std row
//     members <k>
//     member <input_dim> <window> <conv1> <conv2> <kernel> <classes> <regression> <leaky_slope>
//       tensor <name> <rows> <cols>              then `rows` lines of `cols` values
//     end
//   end
//
// Doubles are written in shortest round-trip form, so save/load is exact.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "gesturespot/training.hpp"

namespace gesturespot {

enum class Strategy { kVoting, kFsm, kProposal, kBaseline };

std::string_view strategy_name(Strategy s);
Strategy parse_strategy(std::string_view name);

struct ModelBundle {
  Strategy strategy = Strategy::kVoting;
  // voting/fsm: "window"; proposal: "tiny", "large"; baseline: "segment"
  std::map<std::string, TcnEnsemble> ensembles;
  std::optional<std::array<double, kNumLabels>> thresholds;
  std::string config;  // key=value lines of the training configuration

  const TcnEnsemble& ensemble(const std::string& role) const;
};

std::string write_model(const ModelBundle& model);
ModelBundle parse_model(std::string_view text);

}  // namespace gesturespot
