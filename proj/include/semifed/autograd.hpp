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
#include <optional>
#include <vector>

namespace semifed {

enum class OpKind
{
  Leaf,
  Constant,
  MatMul,
  Conv2d,
  Relu,
  Exp,
  Log,
  Add,
  Mul,
  Scale,
  ChannelBias,
  Reshape,
  Sum,
  Mean,
  Softmax,
  LogSoftmax,
  Pick,
};

char const *op_name(OpKind op);

/// Handle to a node of a Graph.
struct Var
{
  std::size_t id;
};

struct Node
{
  OpKind                   op;
  std::vector<std::size_t> inputs;
  Tensor                   value;
  bool                     requires_grad{false};
  double                   factor{1.0};       // Scale
  std::size_t              stride{1};         // Conv2d
  std::size_t              padding{0};        // Conv2d
  std::vector<std::size_t> picks{};           // Pick
};

class Gradients
{
public:
  explicit Gradients(std::vector<std::optional<Tensor>> grads)
    : grads_(std::move(grads))
  {}

  bool has(Var v) const
  {
    return v.id < grads_.size() && grads_[v.id].has_value();
  }

  /// Gradient of the loss with respect to v; throws ContractError if v took no part in the loss.
  Tensor const &of(Var v) const;

private:
  std::vector<std::optional<Tensor>> grads_;
};

/**
 * Tape for reverse-mode differentiation.
 *
 * Nodes are appended in evaluation order, so every input id of node i is smaller than i and
 * the tape is already a topological order. Forward values are computed eagerly when a node is
 * recorded. A graph is not thread-safe; build one graph per thread.
 */
class Graph
{
public:
  Var leaf(Tensor value, bool requires_grad = true);
  Var constant(Tensor value);

  Var matmul(Var a, Var b);
  Var conv2d(Var x, Var kernel, std::size_t stride, std::size_t padding);
  Var relu(Var a);
  Var exp(Var a);
  Var log(Var a);
  Var add(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double factor);
  Var add_channel_bias(Var a, Var bias);
  Var reshape(Var a, Shape shape);
  Var sum(Var a);
  Var mean(Var a);
  Var softmax(Var a);
  Var log_softmax(Var a);

  /// out[b] = a[b, picks[b]] for a [B,C].
  Var pick(Var a, std::vector<std::size_t> picks);

  Tensor const &value(Var v) const
  {
    return nodes_.at(v.id).value;
  }
  Node const &node(Var v) const
  {
    return nodes_.at(v.id);
  }
  std::size_t size() const noexcept
  {
    return nodes_.size();
  }

  /// Accumulates d(loss)/d(node) for every node that requires a gradient. loss must be scalar.
  Gradients backward(Var loss) const;

private:
  Var push(Node node);

  std::vector<Node> nodes_;
};

}  // namespace semifed
