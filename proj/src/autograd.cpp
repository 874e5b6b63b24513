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

#include "semifed/autograd.hpp"

#include "semifed/error.hpp"

#include <cmath>
#include <string>

namespace semifed {

char const *op_name(OpKind op)
{
  switch (op)
  {
  case OpKind::Leaf:
    return "leaf";
  case OpKind::Constant:
    return "constant";
  case OpKind::MatMul:
    return "matmul";
  case OpKind::Conv2d:
    return "conv2d";
  case OpKind::Relu:
    return "relu";
  case OpKind::Exp:
    return "exp";
  case OpKind::Log:
    return "log";
  case OpKind::Add:
    return "add";
  case OpKind::Mul:
    return "mul";
  case OpKind::Scale:
    return "scale";
  case OpKind::ChannelBias:
    return "add_channel_bias";
  case OpKind::Reshape:
    return "reshape";
  case OpKind::Sum:
    return "sum";
  case OpKind::Mean:
    return "mean";
  case OpKind::Softmax:
    return "softmax";
  case OpKind::LogSoftmax:
    return "log_softmax";
  case OpKind::Pick:
    return "pick";
  }
  return "?";
}

Tensor const &Gradients::of(Var v) const
{
  if (!has(v))
  {
    throw ContractError("no gradient recorded for node " + std::to_string(v.id));
  }
  return *grads_[v.id];
}

Var Graph::push(Node node)
{
  for (auto in : node.inputs)
  {
    if (in >= nodes_.size())
    {
      throw ContractError("graph input id " + std::to_string(in) + " does not exist");
    }
    node.requires_grad = node.requires_grad || nodes_[in].requires_grad;
  }
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

Var Graph::leaf(Tensor value, bool requires_grad)
{
  return push(Node{OpKind::Leaf, {}, std::move(value), requires_grad});
}

Var Graph::constant(Tensor value)
{
  return push(Node{OpKind::Constant, {}, std::move(value), false});
}

Var Graph::matmul(Var a, Var b)
{
  return push(Node{OpKind::MatMul, {a.id, b.id}, kernels::matmul(value(a), value(b))});
}

Var Graph::conv2d(Var x, Var kernel, std::size_t stride, std::size_t padding)
{
  Node n{OpKind::Conv2d, {x.id, kernel.id},
         kernels::conv2d(value(x), value(kernel), stride, padding)};
  n.stride  = stride;
  n.padding = padding;
  return push(std::move(n));
}

Var Graph::relu(Var a)
{
  return push(Node{OpKind::Relu, {a.id}, kernels::relu(value(a))});
}

Var Graph::exp(Var a)
{
  return push(Node{OpKind::Exp, {a.id}, kernels::exp(value(a))});
}

Var Graph::log(Var a)
{
  return push(Node{OpKind::Log, {a.id}, kernels::log(value(a))});
}

Var Graph::add(Var a, Var b)
{
  return push(Node{OpKind::Add, {a.id, b.id}, kernels::add(value(a), value(b))});
}

Var Graph::mul(Var a, Var b)
{
  return push(Node{OpKind::Mul, {a.id, b.id}, kernels::mul(value(a), value(b))});
}

Var Graph::scale(Var a, double factor)
{
  Node n{OpKind::Scale, {a.id}, kernels::scale(value(a), factor)};
  n.factor = factor;
  return push(std::move(n));
}

Var Graph::add_channel_bias(Var a, Var bias)
{
  return push(
      Node{OpKind::ChannelBias, {a.id, bias.id}, kernels::add_channel_bias(value(a), value(bias))});
}

Var Graph::reshape(Var a, Shape shape)
{
  return push(Node{OpKind::Reshape, {a.id}, value(a).reshaped(std::move(shape))});
}

Var Graph::sum(Var a)
{
  return push(Node{OpKind::Sum, {a.id}, Tensor::scalar(kernels::sum(value(a)))});
}

Var Graph::mean(Var a)
{
  return push(Node{OpKind::Mean, {a.id}, Tensor::scalar(kernels::mean(value(a)))});
}

Var Graph::softmax(Var a)
{
  return push(Node{OpKind::Softmax, {a.id}, kernels::softmax(value(a))});
}

Var Graph::log_softmax(Var a)
{
  return push(Node{OpKind::LogSoftmax, {a.id}, kernels::log_softmax(value(a))});
}

Var Graph::pick(Var a, std::vector<std::size_t> picks)
{
  Tensor const &in = value(a);
  if (in.rank() != 2 || picks.size() != in.dim(0))
  {
    throw DimensionError("pick: need [B,C] input with B indices, got " + shape_str(in.shape()) +
                         " and " + std::to_string(picks.size()) + " indices");
  }
  std::vector<double> out(picks.size());
  for (std::size_t b = 0; b < picks.size(); ++b)
  {
    if (picks[b] >= in.dim(1))
    {
      throw LabelError("pick: index " + std::to_string(picks[b]) + " out of range [0," +
                       std::to_string(in.dim(1)) + ")");
    }
    out[b] = in.at(b, picks[b]);
  }
  Node n{OpKind::Pick, {a.id}, Tensor::vector(std::move(out))};
  n.picks = std::move(picks);
  return push(std::move(n));
}

namespace {

void accumulate(std::optional<Tensor> &slot, Tensor const &g)
{
  if (!slot)
  {
    slot = g;
    return;
  }
  auto dst = slot->values();
  auto src = g.values();
  for (std::size_t i = 0; i < dst.size(); ++i)
  {
    dst[i] += src[i];
  }
}

// Sums a [B, ...] gradient over its leading axis to match a broadcast operand.
Tensor reduce_leading(Tensor const &g, Shape const &target)
{
  std::vector<double> out(shape_size(target), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i)
  {
    out[i % out.size()] += g[i];
  }
  return Tensor(target, std::move(out));
}

// Row-wise softmax Jacobian-vector product: dx = y * (dy - sum(dy * y)).
Tensor softmax_backward(Tensor const &y, Tensor const &dy)
{
  std::size_t const   cols = y.dim(y.rank() - 1);
  std::vector<double> dx(y.size());
  for (std::size_t r = 0; r < y.size() / cols; ++r)
  {
    double dot = 0.0;
    for (std::size_t c = 0; c < cols; ++c)
    {
      dot += dy[r * cols + c] * y[r * cols + c];
    }
    for (std::size_t c = 0; c < cols; ++c)
    {
      dx[r * cols + c] = y[r * cols + c] * (dy[r * cols + c] - dot);
    }
  }
  return Tensor(y.shape(), std::move(dx));
}

// For y = log_softmax(x): dx = dy - softmax(x) * sum(dy).
Tensor log_softmax_backward(Tensor const &y, Tensor const &dy)
{
  std::size_t const   cols = y.dim(y.rank() - 1);
  std::vector<double> dx(y.size());
  for (std::size_t r = 0; r < y.size() / cols; ++r)
  {
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c)
    {
      total += dy[r * cols + c];
    }
    for (std::size_t c = 0; c < cols; ++c)
    {
      dx[r * cols + c] = dy[r * cols + c] - std::exp(y[r * cols + c]) * total;
    }
  }
  return Tensor(y.shape(), std::move(dx));
}

}  // namespace

Gradients Graph::backward(Var loss) const
{
  if (loss.id >= nodes_.size())
  {
    throw ContractError("backward: loss node does not exist");
  }
  if (!nodes_[loss.id].value.is_scalar())
  {
    throw ContractError("backward: loss must be scalar, got shape " +
                        shape_str(nodes_[loss.id].value.shape()));
  }

  std::vector<std::optional<Tensor>> grads(nodes_.size());
  grads[loss.id] = Tensor::filled(nodes_[loss.id].value.shape(), 1.0);

  for (std::size_t id = loss.id + 1; id-- > 0;)
  {
    Node const &n = nodes_[id];
    if (!grads[id] || !n.requires_grad || n.inputs.empty())
    {
      continue;
    }
    Tensor const &g = *grads[id];
    auto          wants = [&](std::size_t k) { return nodes_[n.inputs[k]].requires_grad; };
    auto          in    = [&](std::size_t k) -> Tensor const & { return nodes_[n.inputs[k]].value; };
    auto          send  = [&](std::size_t k, Tensor const &t) { accumulate(grads[n.inputs[k]], t); };

    switch (n.op)
    {
    case OpKind::Leaf:
    case OpKind::Constant:
      break;
    case OpKind::MatMul:
      if (wants(0))
      {
        send(0, kernels::matmul(g, kernels::transpose(in(1))));
      }
      if (wants(1))
      {
        send(1, kernels::matmul(kernels::transpose(in(0)), g));
      }
      break;
    case OpKind::Conv2d:
      if (wants(0))
      {
        send(0, kernels::conv2d_grad_input(g, in(1), in(0).shape(), n.stride, n.padding));
      }
      if (wants(1))
      {
        send(1, kernels::conv2d_grad_kernel(g, in(0), in(1).shape(), n.stride, n.padding));
      }
      break;
    case OpKind::Relu: {
      std::vector<double> d(g.size());
      for (std::size_t i = 0; i < d.size(); ++i)
      {
        d[i] = in(0)[i] > 0.0 ? g[i] : 0.0;
      }
      send(0, Tensor(g.shape(), std::move(d)));
      break;
    }
    case OpKind::Exp:
      send(0, kernels::mul(g, n.value));
      break;
    case OpKind::Log: {
      std::vector<double> d(g.size());
      for (std::size_t i = 0; i < d.size(); ++i)
      {
        d[i] = g[i] / in(0)[i];
      }
      send(0, Tensor(g.shape(), std::move(d)));
      break;
    }
    case OpKind::Add:
      if (wants(0))
      {
        send(0, g);
      }
      if (wants(1))
      {
        send(1, in(1).shape() == g.shape() ? g : reduce_leading(g, in(1).shape()));
      }
      break;
    case OpKind::Mul:
      if (wants(0))
      {
        send(0, kernels::mul(g, in(1)));
      }
      if (wants(1))
      {
        send(1, kernels::mul(g, in(0)));
      }
      break;
    case OpKind::Scale:
      send(0, kernels::scale(g, n.factor));
      break;
    case OpKind::ChannelBias:
      if (wants(0))
      {
        send(0, g);
      }
      if (wants(1))
      {
        Shape const        &s        = g.shape();
        std::size_t const   channels = in(1).dim(0);
        std::size_t const   plane    = s[s.size() - 2] * s[s.size() - 1];
        std::vector<double> d(channels, 0.0);
        for (std::size_t i = 0; i < g.size(); ++i)
        {
          d[(i / plane) % channels] += g[i];
        }
        send(1, Tensor({channels}, std::move(d)));
      }
      break;
    case OpKind::Reshape:
      send(0, g.reshaped(in(0).shape()));
      break;
    case OpKind::Sum:
      send(0, Tensor::filled(in(0).shape(), g.item()));
      break;
    case OpKind::Mean:
      send(0, Tensor::filled(in(0).shape(), g.item() / static_cast<double>(in(0).size())));
      break;
    case OpKind::Softmax:
      send(0, softmax_backward(n.value, g));
      break;
    case OpKind::LogSoftmax:
      send(0, log_softmax_backward(n.value, g));
      break;
    case OpKind::Pick: {
      Tensor d = Tensor::zeros(in(0).shape());
      for (std::size_t b = 0; b < n.picks.size(); ++b)
      {
        d[b * in(0).dim(1) + n.picks[b]] += g[b];
      }
      send(0, d);
      break;
    }
    }
  }
  return Gradients(std::move(grads));
}

}  // namespace semifed
