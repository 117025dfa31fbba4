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

#pragma once

#include <string>
#include <vector>

namespace fqu {

// Adapted coordinates (t, s1..sm, q1..qn, p1..pn). Indices passed to these
// helpers are zero-based; the printed names are one-based.

inline const std::string& time_var() {
  static const std::string name = "t";
  return name;
}
inline std::string sigma_var(int lambda) { return "s" + std::to_string(lambda + 1); }
inline std::string q_var(int k) { return "q" + std::to_string(k + 1); }
inline std::string p_var(int k) { return "p" + std::to_string(k + 1); }

/// Variables a coefficient field may use: t, s1..sm, q1..qn, in slot order.
inline std::vector<std::string> coefficient_variables(int m, int n) {
  std::vector<std::string> vars{time_var()};
  for (int l = 0; l < m; ++l) vars.push_back(sigma_var(l));
  for (int k = 0; k < n; ++k) vars.push_back(q_var(k));
  return vars;
}

/// Variables a parameter-space field may use: t, s1..sm.
inline std::vector<std::string> parameter_variables(int m) { return coefficient_variables(m, 0); }

}  // namespace fqu
