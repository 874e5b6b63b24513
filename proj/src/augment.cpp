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

#include "semifed/augment.hpp"

#include "semifed/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace semifed {

namespace {

struct Image
{
  std::size_t channels, height, width;
};

Image image_dims(Tensor const &t)
{
  if (t.rank() != 3)
  {
    throw DimensionError("augment: image must be [C,H,W], got " + shape_str(t.shape()));
  }
  return {t.dim(0), t.dim(1), t.dim(2)};
}

double clamp01(double v)
{
  return std::clamp(v, 0.0, 1.0);
}

double sign(Rng &rng)
{
  return rng.below(2) == 0 ? -1.0 : 1.0;
}

std::ptrdiff_t scaled_pixels(double fraction, std::size_t extent)
{
  return std::max<std::ptrdiff_t>(
      1, static_cast<std::ptrdiff_t>(std::lround(fraction * static_cast<double>(extent))));
}

// out(c,y,x) = in(c, y - dy, x - dx), kFillValue outside.
Tensor shift(Tensor const &in, std::ptrdiff_t dy, std::ptrdiff_t dx)
{
  Image const         im = image_dims(in);
  std::vector<double> out(in.size(), kFillValue);
  auto const          h = static_cast<std::ptrdiff_t>(im.height);
  auto const          w = static_cast<std::ptrdiff_t>(im.width);
  for (std::size_t c = 0; c < im.channels; ++c)
  {
    for (std::ptrdiff_t y = 0; y < h; ++y)
    {
      for (std::ptrdiff_t x = 0; x < w; ++x)
      {
        std::ptrdiff_t const sy = y - dy;
        std::ptrdiff_t const sx = x - dx;
        if (sy >= 0 && sy < h && sx >= 0 && sx < w)
        {
          out[(c * im.height + static_cast<std::size_t>(y)) * im.width + static_cast<std::size_t>(x)] =
              in[(c * im.height + static_cast<std::size_t>(sy)) * im.width + static_cast<std::size_t>(sx)];
        }
      }
    }
  }
  return Tensor(in.shape(), std::move(out));
}

Tensor flip(Tensor const &in)
{
  Image const         im = image_dims(in);
  std::vector<double> out(in.size());
  for (std::size_t c = 0; c < im.channels; ++c)
  {
    for (std::size_t y = 0; y < im.height; ++y)
    {
      std::size_t const row = (c * im.height + y) * im.width;
      for (std::size_t x = 0; x < im.width; ++x)
      {
        out[row + x] = in[row + im.width - 1 - x];
      }
    }
  }
  return Tensor(in.shape(), std::move(out));
}

template <typename F>
Tensor pointwise(Tensor const &in, F &&f)
{
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < out.size(); ++i)
  {
    out[i] = clamp01(f(in[i], i));
  }
  return Tensor(in.shape(), std::move(out));
}

Tensor slice(Tensor const &batch, std::size_t b)
{
  Shape const       inner(batch.shape().begin() + 1, batch.shape().end());
  std::size_t const n = shape_size(inner);
  auto const        v = batch.values().subspan(b * n, n);
  return Tensor(inner, std::vector<double>(v.begin(), v.end()));
}

template <typename F>
Tensor map_samples(Tensor const &batch, F &&f)
{
  std::vector<double> out;
  out.reserve(batch.size());
  for (std::size_t b = 0; b < batch.dim(0); ++b)
  {
    Tensor const t = f(slice(batch, b));
    out.insert(out.end(), t.values().begin(), t.values().end());
  }
  return Tensor(batch.shape(), std::move(out));
}

}  // namespace

std::string_view op_name(AugmentOp op)
{
  switch (op)
  {
  case AugmentOp::TranslateX:
    return "translate-x";
  case AugmentOp::TranslateY:
    return "translate-y";
  case AugmentOp::HorizontalFlip:
    return "horizontal-flip";
  case AugmentOp::CropPad:
    return "crop-pad";
  case AugmentOp::Brightness:
    return "brightness";
  case AugmentOp::Contrast:
    return "contrast";
  case AugmentOp::Cutout:
    return "cutout";
  case AugmentOp::GaussianNoise:
    return "gaussian-noise";
  }
  return "?";
}

void AugmentPolicy::validate() const
{
  if (n_ops == 0)
  {
    throw ConfigError("augment.n_ops must be at least 1");
  }
  if (magnitude < 1 || magnitude > 10)
  {
    throw ConfigError("augment.magnitude must be in [1, 10], got " + std::to_string(magnitude));
  }
}

Tensor apply_op(AugmentOp op, Tensor const &image, int magnitude, Rng &rng)
{
  Image const  im = image_dims(image);
  double const s  = static_cast<double>(magnitude) / 10.0;
  switch (op)
  {
  case AugmentOp::TranslateX:
    return shift(image, 0, static_cast<std::ptrdiff_t>(sign(rng)) * scaled_pixels(0.3 * s, im.width));
  case AugmentOp::TranslateY:
    return shift(image, static_cast<std::ptrdiff_t>(sign(rng)) * scaled_pixels(0.3 * s, im.height), 0);
  case AugmentOp::HorizontalFlip:
    return flip(image);
  case AugmentOp::CropPad: {
    // pad by `pad` on every side, then crop back at a random offset
    std::ptrdiff_t const pad  = scaled_pixels(0.125 * s, std::min(im.height, im.width));
    auto const           span = static_cast<std::uint64_t>(2 * pad + 1);
    std::ptrdiff_t const dy   = static_cast<std::ptrdiff_t>(rng.below(span)) - pad;
    std::ptrdiff_t const dx   = static_cast<std::ptrdiff_t>(rng.below(span)) - pad;
    return shift(image, dy, dx);
  }
  case AugmentOp::Brightness: {
    double const delta = sign(rng) * 0.3 * s;
    return pointwise(image, [delta](double v, std::size_t) { return v + delta; });
  }
  case AugmentOp::Contrast: {
    double const        factor = 1.0 + sign(rng) * 0.5 * s;
    std::size_t const   plane  = im.height * im.width;
    std::vector<double> means(im.channels, 0.0);
    for (std::size_t i = 0; i < image.size(); ++i)
    {
      means[i / plane] += image[i];
    }
    for (auto &m : means)
    {
      m /= static_cast<double>(plane);
    }
    return pointwise(image, [&](double v, std::size_t i) {
      double const m = means[i / plane];
      return m + factor * (v - m);
    });
  }
  case AugmentOp::Cutout: {
    std::size_t const   size = static_cast<std::size_t>(
        scaled_pixels(0.5 * s, std::min(im.height, im.width)));
    std::size_t const   cy = rng.below(im.height);
    std::size_t const   cx = rng.below(im.width);
    std::size_t const   y0 = cy >= size / 2 ? cy - size / 2 : 0;
    std::size_t const   x0 = cx >= size / 2 ? cx - size / 2 : 0;
    std::size_t const   y1 = std::min(im.height, y0 + size);
    std::size_t const   x1 = std::min(im.width, x0 + size);
    std::vector<double> out(image.values().begin(), image.values().end());
    for (std::size_t c = 0; c < im.channels; ++c)
    {
      for (std::size_t y = y0; y < y1; ++y)
      {
        for (std::size_t x = x0; x < x1; ++x)
        {
          out[(c * im.height + y) * im.width + x] = kFillValue;
        }
      }
    }
    return Tensor(image.shape(), std::move(out));
  }
  case AugmentOp::GaussianNoise: {
    double const sigma = 0.1 * s;
    return pointwise(image, [&](double v, std::size_t) { return v + rng.normal(0.0, sigma); });
  }
  }
  return image;
}

Tensor perturb(Tensor const &image, AugmentPolicy const &policy, Rng &rng)
{
  policy.validate();
  Tensor out = image;
  for (std::size_t i = 0; i < policy.n_ops; ++i)
  {
    AugmentOp const op = kAugmentOps[rng.below(kAugmentOps.size())];
    out                = apply_op(op, out, policy.magnitude, rng);
  }
  return out;
}

Tensor weak_augment(Tensor const &image, Rng &rng)
{
  Image const im  = image_dims(image);
  Tensor      out = rng.below(2) == 0 ? image : flip(image);
  auto const  max_shift = static_cast<std::uint64_t>(std::min<std::size_t>(2, im.width / 8));
  if (max_shift == 0)
  {
    return out;
  }
  std::ptrdiff_t const dy =
      static_cast<std::ptrdiff_t>(rng.below(2 * max_shift + 1)) - static_cast<std::ptrdiff_t>(max_shift);
  std::ptrdiff_t const dx =
      static_cast<std::ptrdiff_t>(rng.below(2 * max_shift + 1)) - static_cast<std::ptrdiff_t>(max_shift);
  return shift(out, dy, dx);
}

Tensor perturb_vector(Tensor const &x, double sigma, Rng &rng)
{
  if (sigma < 0.0)
  {
    throw ContractError("perturb_vector: sigma must be nonnegative");
  }
  if (sigma == 0.0)
  {
    return x;
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i)
  {
    out[i] = x[i] + sigma * rng.normal();
  }
  return Tensor(x.shape(), std::move(out));
}

Tensor perturb_batch(Tensor const &batch, AugmentPolicy const &policy, double sigma, Rng &rng)
{
  if (batch.rank() == 4)
  {
    return map_samples(batch, [&](Tensor const &img) { return perturb(img, policy, rng); });
  }
  return perturb_vector(batch, sigma, rng);
}

Tensor weak_augment_batch(Tensor const &batch, Rng &rng)
{
  if (batch.rank() != 4)
  {
    return batch;
  }
  return map_samples(batch, [&](Tensor const &img) { return weak_augment(img, rng); });
}

}  // namespace semifed
