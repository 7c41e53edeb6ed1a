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

#ifndef DSRG_WORLD_H_
#define DSRG_WORLD_H_

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dsrg/aspects.h"
#include "dsrg/encoder.h"
#include "dsrg/linalg.h"
#include "dsrg/random.h"

namespace dsrg {

struct ToyWorldOptions {
  std::size_t latent_dim = 16;
  // Centroid of attribute a in its aspect's block: radius * (e_a - 1/|A|).
  double centroid_radius = 1.0;
  double noise_scale = 0.15;

  friend bool operator==(const ToyWorldOptions&, const ToyWorldOptions&) = default;
};

// Synthetic "image" space. Each aspect owns a block of |A| latent
// coordinates; a sample for a profession is the sum of one centroid per
// aspect (drawn from the skew model unless forced) plus isotropic noise.
class ToyWorld {
 public:
  ToyWorld() = default;

  // Throws InvalidInput when the blocks do not fit in latent_dim or when
  // centroids within an aspect are closer than 4 * noise_scale.
  static ToyWorld Build(const AspectRegistry& registry, const SkewModel& skew,
                        const ToyWorldOptions& options = {});
  // Rebuilds from explicit centroids (checkpoint load).
  static ToyWorld FromCentroids(const AspectRegistry& registry, const SkewModel& skew,
                                double noise_scale,
                                std::vector<std::vector<Vector>> centroids);

  struct Draw {
    std::vector<double> x0;
    // Attribute index per aspect, registry order.
    std::vector<std::size_t> attributes;
  };

  // Attribute distribution of one aspect: the skew for a profession, uniform
  // for the empty profession (prompts about a generic subject).
  std::vector<double> Prior(std::string_view profession, std::size_t aspect) const;

  // `forced` maps aspect name -> attribute name.
  Draw Sample(std::string_view profession,
              const std::map<std::string, std::string>& forced, Rng& rng) const;

  const AspectRegistry& registry() const { return registry_; }
  const SkewModel& skew() const { return skew_; }
  std::size_t latent_dim() const { return latent_dim_; }
  double noise_scale() const { return noise_scale_; }
  const Vector& Centroid(std::size_t aspect, std::size_t attribute) const {
    return centroids_[aspect][attribute];
  }
  const std::vector<std::vector<Vector>>& centroids() const { return centroids_; }
  // Smallest distance between two centroids of the same aspect.
  double MinSeparation() const;

  // Mixture mean and per-coordinate variance of x0 for a profession.
  std::pair<std::vector<double>, std::vector<double>> MixtureMoments(
      std::string_view profession) const;

 private:
  void Validate() const;

  AspectRegistry registry_;
  SkewModel skew_;
  std::size_t latent_dim_ = 0;
  double noise_scale_ = 0.0;
  std::vector<std::vector<Vector>> centroids_;
};

}  // namespace dsrg

#endif  // DSRG_WORLD_H_
