// Copyright 2026 The DSRG Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dsrg/aspects.h"

#include <algorithm>
#include <set>

#include "dsrg/error.h"

namespace dsrg {

AspectRegistry AspectRegistry::Default() {
  AspectRegistry registry;
  registry.Add("gender", {"male", "female"});
  registry.Add("race", {"white", "asian", "black"});
  registry.Add("age", {"young", "middle-aged", "elderly"});
  registry.Add("safe", {"harassment", "sexual", "violence"});
  return registry;
}

void AspectRegistry::Add(std::string name, std::vector<std::string> attributes) {
  if (name.empty()) Fail(ErrorCode::kInvalidInput, "aspect name is empty");
  if (FindAspect(name)) {
    Fail(ErrorCode::kInvalidInput, "duplicate aspect '" + name + "'");
  }
  if (attributes.size() < 2) {
    Fail(ErrorCode::kInvalidInput, "aspect '" + name + "' needs at least 2 attributes");
  }
  std::set<std::string> seen;
  for (const std::string& attr : attributes) {
    if (attr.empty() || !seen.insert(attr).second) {
      Fail(ErrorCode::kInvalidInput,
           "aspect '" + name + "' has an empty or duplicate attribute");
    }
  }
  aspects_.push_back({std::move(name), std::move(attributes)});
}

std::optional<std::size_t> AspectRegistry::FindAspect(std::string_view name) const {
  for (std::size_t i = 0; i < aspects_.size(); ++i) {
    if (aspects_[i].name == name) return i;
  }
  return std::nullopt;
}

const Aspect& AspectRegistry::aspect(std::string_view name) const {
  return aspects_[AspectIndex(name)];
}

std::size_t AspectRegistry::AspectIndex(std::string_view name) const {
  const auto index = FindAspect(name);
  if (!index) {
    Fail(ErrorCode::kInvalidInput, "unknown aspect '" + std::string(name) + "'");
  }
  return *index;
}

std::size_t AspectRegistry::AttributeIndex(std::string_view aspect_name,
                                           std::string_view attribute) const {
  const Aspect& a = aspect(aspect_name);
  const auto it = std::find(a.attributes.begin(), a.attributes.end(), attribute);
  if (it == a.attributes.end()) {
    Fail(ErrorCode::kInvalidInput, "unknown attribute '" + std::string(attribute) +
                                       "' for aspect '" + a.name + "'");
  }
  return static_cast<std::size_t>(it - a.attributes.begin());
}

std::size_t AspectRegistry::TotalAttributes() const {
  std::size_t total = 0;
  for (const Aspect& a : aspects_) total += a.attributes.size();
  return total;
}

std::size_t AspectRegistry::BlockOffset(std::size_t aspect_index) const {
  std::size_t offset = 0;
  for (std::size_t i = 0; i < aspect_index; ++i) {
    offset += aspects_[i].attributes.size();
  }
  return offset;
}

}  // namespace dsrg
