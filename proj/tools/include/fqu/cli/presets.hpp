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

// Scenarios shipped with the tool.

#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace fqu::cli {

const std::vector<std::string>& preset_names();

/// The preset document. Throws ModelError for an unknown name.
nlohmann::json preset_document(const std::string& name);

}  // namespace fqu::cli
