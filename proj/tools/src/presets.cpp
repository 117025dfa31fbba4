// Copyright 2026 The fqu Authors
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

#include "fqu/cli/presets.hpp"

#include <algorithm>

#include "fqu/error.hpp"
#include "fqu_presets_embedded.hpp"

namespace fqu::cli {

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& p : embedded_presets) out.emplace_back(p.name);
    return out;
  }();
  return names;
}

nlohmann::json preset_document(const std::string& name) {
  for (const auto& p : embedded_presets) {
    if (name == p.name) return nlohmann::json::parse(p.text);
  }
  std::string valid;
  for (const auto& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw ModelError("unknown preset '" + name + "'; valid presets: " + valid);
}

}  // namespace fqu::cli
