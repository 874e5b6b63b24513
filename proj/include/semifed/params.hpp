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

#include "semifed/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace semifed {

/// One named parameter tensor, stored in 32-bit precision.
struct ParamTensor
{
  std::string        name;
  Shape              shape;
  std::vector<float> values;

  bool operator==(ParamTensor const &) const = default;
};

/// Ordered sequence of named parameter tensors: the unit that is trained, averaged and shipped.
class ModelParams
{
public:
  ModelParams() = default;
  explicit ModelParams(std::vector<ParamTensor> tensors);

  std::vector<ParamTensor> const &tensors() const noexcept
  {
    return tensors_;
  }
  std::vector<ParamTensor> &tensors() noexcept
  {
    return tensors_;
  }
  std::size_t size() const noexcept
  {
    return tensors_.size();
  }
  ParamTensor const &operator[](std::size_t i) const
  {
    return tensors_[i];
  }
  ParamTensor &operator[](std::size_t i)
  {
    return tensors_[i];
  }

  ParamTensor const &find(std::string const &name) const;

  /// Total number of scalar parameters.
  std::size_t count() const noexcept;

  /// Widened copy of tensor i for graph evaluation.
  Tensor as_tensor(std::size_t i) const;

  /// True when both hold the same names and shapes.
  bool same_layout(ModelParams const &other) const;

  bool operator==(ModelParams const &) const = default;

private:
  std::vector<ParamTensor> tensors_;
};

/// Gradient per parameter name.
using GradMap = std::map<std::string, Tensor>;

/**
 * Wire format shared by checkpoints and protocol payloads, all integers little-endian:
 *
 *   u32 tensor_count
 *   repeat tensor_count:
 *     u32 name_length, name bytes (UTF-8, no terminator)
 *     u32 rank, u32 dims[rank]
 *     f32 values[product(dims)]
 */
std::vector<std::uint8_t> serialize(ModelParams const &params);
ModelParams               deserialize(std::span<std::uint8_t const> bytes);

/// Size in bytes of serialize(params) without materializing it.
std::size_t serialized_size(ModelParams const &params);

void        save_checkpoint(ModelParams const &params, std::string const &path);
ModelParams load_checkpoint(std::string const &path);

}  // namespace semifed
