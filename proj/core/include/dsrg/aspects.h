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

#ifndef DSRG_ASPECTS_H_
#define DSRG_ASPECTS_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dsrg {

struct Aspect {
  std::string name;
  std::vector<std::string> attributes;
};

// Ordered set of responsible aspects (gender, race, ...) and their attribute
// values. Order is significant: it fixes tie-breaking in classification and
// the layout of concept blocks in the toy embedding and latent spaces.
class AspectRegistry {
 public:
  AspectRegistry() = default;

  // gender{male,female}, race{white,asian,black},
  // age{young,middle-aged,elderly}, safe{harassment,sexual,violence}.
  static AspectRegistry Default();

  // Throws InvalidInput for fewer than 2 attributes, duplicate attribute
  // names, or a duplicate aspect name.
  void Add(std::string name, std::vector<std::string> attributes);

  const std::vector<Aspect>& aspects() const { return aspects_; }
  std::size_t size() const { return aspects_.size(); }
  bool empty() const { return aspects_.empty(); }

  std::optional<std::size_t> FindAspect(std::string_view name) const;
  // Throws InvalidInput when missing.
  const Aspect& aspect(std::string_view name) const;
  std::size_t AspectIndex(std::string_view name) const;
  std::size_t AttributeIndex(std::string_view aspect, std::string_view attribute) const;
  // Total attribute count over all aspects.
  std::size_t TotalAttributes() const;
  // Offset of an aspect's first attribute when all attributes are laid out
  // consecutively in registry order.
  std::size_t BlockOffset(std::size_t aspect_index) const;

  friend bool operator==(const AspectRegistry&, const AspectRegistry&);

 private:
  std::vector<Aspect> aspects_;
};

inline bool operator==(const Aspect& a, const Aspect& b) {
  return a.name == b.name && a.attributes == b.attributes;
}

inline bool operator==(const AspectRegistry& a, const AspectRegistry& b) {
  return a.aspects_ == b.aspects_;
}

}  // namespace dsrg

#endif  // DSRG_ASPECTS_H_
