//------------------------------------------------------------------------------
//
//   Copyright 2026 The SemiFed Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#pragma once

#include "semifed/rng.hpp"
#include "semifed/tensor.hpp"

#include <array>
#include <cstddef>
#include <string_view>

namespace semifed {

enum class AugmentOp
{
  TranslateX,
  TranslateY,
  HorizontalFlip,
  CropPad,
  Brightness,
  Contrast,
  Cutout,
  GaussianNoise,
};

inline constexpr std::array<AugmentOp, 8> kAugmentOps{
    AugmentOp::TranslateX, AugmentOp::TranslateY, AugmentOp::HorizontalFlip, AugmentOp::CropPad,
    AugmentOp::Brightness, AugmentOp::Contrast,   AugmentOp::Cutout,         AugmentOp::GaussianNoise,
};

std::string_view op_name(AugmentOp op);

/// RandAugment-lite: n_ops operations drawn uniformly with replacement, each at magnitude/10.
struct AugmentPolicy
{
  std::size_t n_ops{2};
  int         magnitude{9};

  /// Throws ConfigError unless n_ops >= 1 and magnitude in [1, 10].
  void validate() const;
};

/// Value used to fill uncovered pixels and cutout patches.
inline constexpr double kFillValue = 0.5;

/**
 * Applies one operation to an image [C,H,W] with values in [0,1].
 *
 * Geometric operations use nearest-neighbour sampling and fill uncovered pixels with
 * kFillValue; the result is clamped to [0,1]. horizontal-flip ignores the magnitude.
 */
Tensor apply_op(AugmentOp op, Tensor const &image, int magnitude, Rng &rng);

/// Strong perturbation of one image [C,H,W]: draws policy.n_ops ops and applies them in order.
Tensor perturb(Tensor const &image, AugmentPolicy const &policy, Rng &rng);

/// Weak augmentation for labeled images: random flip then a translate of at most 2 pixels.
Tensor weak_augment(Tensor const &image, Rng &rng);

/// x + N(0, sigma^2) elementwise.
Tensor perturb_vector(Tensor const &x, double sigma, Rng &rng);

/// Applies perturb (rank-4 input) or perturb_vector (rank-2 input) to every sample of a batch.
Tensor perturb_batch(Tensor const &batch, AugmentPolicy const &policy, double sigma, Rng &rng);

/// Applies weak_augment to every image of a rank-4 batch; other ranks are returned unchanged.
Tensor weak_augment_batch(Tensor const &batch, Rng &rng);

}  // namespace semifed
