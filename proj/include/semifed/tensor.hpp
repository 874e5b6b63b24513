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

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace semifed {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(Shape const &shape);
std::string shape_str(Shape const &shape);

/**
 * Dense row-major array of doubles.
 *
 * Every tensor satisfies values().size() == product(shape()) and every dimension is positive.
 * Tensors are values: operations never alias their inputs.
 */
class Tensor
{
public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values);

  static Tensor filled(Shape shape, double v);
  static Tensor zeros(Shape shape)
  {
    return filled(std::move(shape), 0.0);
  }

  static Tensor scalar(double v)
  {
    return Tensor({1}, {v});
  }
  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  Shape const &shape() const noexcept
  {
    return shape_;
  }
  std::size_t rank() const noexcept
  {
    return shape_.size();
  }
  std::size_t dim(std::size_t axis) const
  {
    return shape_.at(axis);
  }
  std::size_t size() const noexcept
  {
    return values_.size();
  }
  bool empty() const noexcept
  {
    return values_.empty();
  }
  bool is_scalar() const noexcept
  {
    return values_.size() == 1;
  }

  std::span<double const> values() const noexcept
  {
    return values_;
  }
  std::span<double> values() noexcept
  {
    return values_;
  }
  double operator[](std::size_t i) const
  {
    return values_[i];
  }
  double &operator[](std::size_t i)
  {
    return values_[i];
  }
  double item() const;

  double at(std::size_t i, std::size_t j) const
  {
    return values_[i * shape_[1] + j];
  }

  Tensor reshaped(Shape shape) const;

  bool operator==(Tensor const &other) const = default;

private:
  Shape               shape_;
  std::vector<double> values_;
};

/// Pure forward kernels. Shape rules: no broadcasting except over a single leading batch axis.
namespace kernels {

Tensor matmul(Tensor const &a, Tensor const &b);
Tensor transpose(Tensor const &a);

/// Cross-correlation. x is [C_in,H,W] or [B,C_in,H,W]; k is [C_out,C_in,kh,kw].
Tensor conv2d(Tensor const &x, Tensor const &k, std::size_t stride, std::size_t padding);

/// Gradients of conv2d with respect to its input and its kernel.
Tensor conv2d_grad_input(Tensor const &grad_out, Tensor const &k, Shape const &x_shape,
                         std::size_t stride, std::size_t padding);
Tensor conv2d_grad_kernel(Tensor const &grad_out, Tensor const &x, Shape const &k_shape,
                          std::size_t stride, std::size_t padding);

Tensor relu(Tensor const &a);
Tensor exp(Tensor const &a);
Tensor log(Tensor const &a);

/// a + b where b has a's shape or a's shape without its leading axis.
Tensor add(Tensor const &a, Tensor const &b);
Tensor mul(Tensor const &a, Tensor const &b);
Tensor scale(Tensor const &a, double s);

/// Adds b[C] along the channel axis of a [.., C, H, W].
Tensor add_channel_bias(Tensor const &a, Tensor const &b);

double sum(Tensor const &a);
double mean(Tensor const &a);

/// Softmax over the last axis of a rank-1 or rank-2 tensor, max-shifted.
Tensor softmax(Tensor const &z);
Tensor log_softmax(Tensor const &z);

}  // namespace kernels

}  // namespace semifed
