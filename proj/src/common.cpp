// Copyright 2026 The scrm-lab Authors.
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

#include "scrm/common.hpp"

#include <cstdio>
#include <map>
#include <mutex>

namespace scrm {

void warn_rate_limited(const std::string& key, const std::string& message) {
  static std::mutex mu;
  static std::map<std::string, long> counts;
  constexpr long kMaxPrinted = 3;

  std::lock_guard<std::mutex> lock(mu);
  const long seen = ++counts[key];
  if (seen <= kMaxPrinted) {
    std::fprintf(stderr, "[scrm-lab] warning (%s): %s%s\n", key.c_str(), message.c_str(),
                 seen == kMaxPrinted ? " (further occurrences suppressed)" : "");
  }
}

}  // namespace scrm
