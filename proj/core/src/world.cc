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

#include "dsrg/world.h"

#include <cmath>

#include "dsrg/error.h"

namespace dsrg {

ToyWorld ToyWorld::Build(const AspectRegistry& registry, const SkewModel& skew,
                         const ToyWorldOptions& options) {
  const std::size_t m = options.latent_dim;
  if (registry.TotalAttributes() > m) {
    Fail(ErrorCode::kInvalidInput, "latent dim " + std::to_string(m) + " cannot hold " +
                                       std::to_string(registry.TotalAttributes()) +
                                       " attribute slots");
  }
  std::vector<std::vector<Vector>> centroids(registry.size());
  for (std::size_t k = 0; k < registry.size(); ++k) {
    const std::size_t n = registry.aspects()[k].attributes.size();
    const std::size_t offset = registry.BlockOffset(k);
    for (std::size_t a = 0; a < n; ++a) {
      Vector c(m);
      for (std::size_t j = 0; j < n; ++j) {
        const double unit = (j == a ? 1.0 : 0.0) - 1.0 / static_cast<double>(n);
        c[offset + j] = static_cast<float>(options.centroid_radius * unit);
      }
      centroids[k].push_back(std::move(c));
    }
  }
  return FromCentroids(registry, skew, options.noise_scale, std::move(centroids));
}

ToyWorld ToyWorld::FromCentroids(const AspectRegistry& registry, const SkewModel& skew,
                                 double noise_scale,
                                 std::vector<std::vector<Vector>> centroids) {
  ToyWorld world;
  world.registry_ = registry;
  world.skew_ = skew;
  world.noise_scale_ = noise_scale;
  world.centroids_ = std::move(centroids);
  world.latent_dim_ = world.centroids_.empty() || world.centroids_[0].empty()
                          ? 0
                          : world.centroids_[0][0].dim();
  world.Validate();
  return world;
}

void ToyWorld::Validate() const {
  if (centroids_.size() != registry_.size()) {
    Fail(ErrorCode::kInvalidInput, "world centroids do not match the registry");
  }
  if (!(noise_scale_ >= 0.0)) {
    Fail(ErrorCode::kInvalidInput, "noise scale must be >= 0");
  }
  for (std::size_t k = 0; k < registry_.size(); ++k) {
    if (centroids_[k].size() != registry_.aspects()[k].attributes.size()) {
      Fail(ErrorCode::kInvalidInput,
           "world centroid count mismatch for '" + registry_.aspects()[k].name + "'");
    }
    for (const Vector& c : centroids_[k]) {
      if (c.dim() != latent_dim_ || !c.AllFinite()) {
        Fail(ErrorCode::kInvalidInput, "world centroid has bad shape");
      }
    }
  }
  if (MinSeparation() < 4.0 * noise_scale_) {
    Fail(ErrorCode::kInvalidInput,
         "centroids closer than 4x the noise scale; classification would be "
         "unreliable");
  }
}

double ToyWorld::MinSeparation() const {
  double best = INFINITY;
  for (const auto& aspect : centroids_) {
    for (std::size_t a = 0; a < aspect.size(); ++a) {
      for (std::size_t b = a + 1; b < aspect.size(); ++b) {
        best = std::min(best, std::sqrt(SquaredDistance(aspect[a], aspect[b])));
      }
    }
  }
  return best;
}

std::vector<double> ToyWorld::Prior(std::string_view profession,
                                    std::size_t aspect) const {
  if (profession.empty()) {
    const std::size_t n = registry_.aspects()[aspect].attributes.size();
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
  }
  const auto p = skew_.Distribution(profession, aspect);
  return {p.begin(), p.end()};
}

ToyWorld::Draw ToyWorld::Sample(std::string_view profession,
                                const std::map<std::string, std::string>& forced,
                                Rng& rng) const {
  Draw draw;
  draw.x0.assign(latent_dim_, 0.0);
  draw.attributes.resize(registry_.size());
  for (std::size_t k = 0; k < registry_.size(); ++k) {
    const Aspect& aspect = registry_.aspects()[k];
    std::size_t attr;
    if (const auto it = forced.find(aspect.name); it != forced.end()) {
      attr = registry_.AttributeIndex(aspect.name, it->second);
    } else {
      attr = rng.Categorical(Prior(profession, k));
    }
    draw.attributes[k] = attr;
    const Vector& c = centroids_[k][attr];
    for (std::size_t j = 0; j < latent_dim_; ++j) draw.x0[j] += c[j];
  }
  for (double& v : draw.x0) v += noise_scale_ * rng.Normal();
  return draw;
}

std::pair<std::vector<double>, std::vector<double>> ToyWorld::MixtureMoments(
    std::string_view profession) const {
  std::vector<double> mean(latent_dim_, 0.0);
  std::vector<double> var(latent_dim_, noise_scale_ * noise_scale_);
  // Aspects are independent, so per-coordinate moments add across aspects.
  for (std::size_t k = 0; k < registry_.size(); ++k) {
    const auto p = Prior(profession, k);
    for (std::size_t j = 0; j < latent_dim_; ++j) {
      double m1 = 0.0, m2 = 0.0;
      for (std::size_t a = 0; a < p.size(); ++a) {
        const double c = centroids_[k][a][j];
        m1 += p[a] * c;
        m2 += p[a] * c * c;
      }
      mean[j] += m1;
      var[j] += m2 - m1 * m1;
    }
  }
  return {std::move(mean), std::move(var)};
}

}  // namespace dsrg
