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

#include "semifed/model.hpp"

#include "semifed/error.hpp"
#include "semifed/rng.hpp"

#include <algorithm>
#include <cmath>

namespace semifed {

namespace {

constexpr std::size_t kConvKernel  = 3;
constexpr std::size_t kConvStride  = 2;
constexpr std::size_t kConvPadding = 1;

std::size_t conv_out(std::size_t n)
{
  return (n + 2 * kConvPadding - kConvKernel) / kConvStride + 1;
}

}  // namespace

std::string to_string(ModelKind kind)
{
  return kind == ModelKind::Mlp ? "mlp" : "small-cnn";
}

ModelKind parse_model_kind(std::string const &s)
{
  if (s == "mlp")
  {
    return ModelKind::Mlp;
  }
  if (s == "small-cnn")
  {
    return ModelKind::SmallCnn;
  }
  throw SpecError("unknown model kind '" + s + "' (expected mlp or small-cnn)");
}

ClassifierSpec ClassifierSpec::mlp(std::vector<std::size_t> const &widths)
{
  if (widths.size() < 2)
  {
    throw SpecError("mlp needs at least an input and an output width");
  }
  ClassifierSpec s;
  s.kind        = ModelKind::Mlp;
  s.input_shape = {widths.front()};
  s.hidden.assign(widths.begin() + 1, widths.end() - 1);
  s.num_classes = widths.back();
  return s;
}

ClassifierSpec ClassifierSpec::small_cnn(Shape input_shape, std::size_t c1, std::size_t c2,
                                         std::size_t hidden_width, std::size_t num_classes)
{
  ClassifierSpec s;
  s.kind        = ModelKind::SmallCnn;
  s.input_shape = std::move(input_shape);
  s.channels    = {c1, c2};
  s.hidden      = {hidden_width};
  s.num_classes = num_classes;
  return s;
}

void ClassifierSpec::validate() const
{
  if (num_classes == 0)
  {
    throw SpecError("classifier needs at least one class");
  }
  for (auto d : input_shape)
  {
    if (d == 0)
    {
      throw SpecError("classifier input shape " + shape_str(input_shape) + " has a zero axis");
    }
  }
  for (auto h : hidden)
  {
    if (h == 0)
    {
      throw SpecError("classifier has a zero-width hidden layer");
    }
  }
  if (kind == ModelKind::Mlp)
  {
    if (input_shape.size() != 1)
    {
      throw SpecError("mlp input must be a vector, got " + shape_str(input_shape));
    }
    return;
  }
  if (input_shape.size() != 3)
  {
    throw SpecError("small-cnn input must be [C,H,W], got " + shape_str(input_shape));
  }
  if (channels.size() != 2 || channels[0] == 0 || channels[1] == 0)
  {
    throw SpecError("small-cnn needs two positive conv channel counts");
  }
  if (hidden.size() != 1)
  {
    throw SpecError("small-cnn needs exactly one dense hidden width");
  }
  if (input_shape[1] + 2 * kConvPadding < kConvKernel ||
      input_shape[2] + 2 * kConvPadding < kConvKernel)
  {
    throw SpecError("small-cnn input " + shape_str(input_shape) + " is smaller than the kernel");
  }
}

std::vector<std::pair<std::string, Shape>> parameter_layout(ClassifierSpec const &spec)
{
  spec.validate();
  std::vector<std::pair<std::string, Shape>> layout;
  std::vector<std::size_t>                   widths;
  if (spec.kind == ModelKind::Mlp)
  {
    widths.push_back(spec.input_shape[0]);
  }
  else
  {
    std::size_t       c  = spec.input_shape[0];
    std::size_t       h  = spec.input_shape[1];
    std::size_t       w  = spec.input_shape[2];
    for (std::size_t i = 0; i < 2; ++i)
    {
      std::string const prefix = "conv" + std::to_string(i);
      layout.emplace_back(prefix + ".weight", Shape{spec.channels[i], c, kConvKernel, kConvKernel});
      layout.emplace_back(prefix + ".bias", Shape{spec.channels[i]});
      c = spec.channels[i];
      h = conv_out(h);
      w = conv_out(w);
    }
    widths.push_back(c * h * w);
  }
  widths.insert(widths.end(), spec.hidden.begin(), spec.hidden.end());
  widths.push_back(spec.num_classes);
  for (std::size_t i = 0; i + 1 < widths.size(); ++i)
  {
    std::string const prefix = "fc" + std::to_string(i);
    layout.emplace_back(prefix + ".weight", Shape{widths[i], widths[i + 1]});
    layout.emplace_back(prefix + ".bias", Shape{widths[i + 1]});
  }
  return layout;
}

ModelParams init_model(ClassifierSpec const &spec, std::uint64_t seed)
{
  Rng                      rng(seed);
  std::vector<ParamTensor> tensors;
  for (auto &[name, shape] : parameter_layout(spec))
  {
    ParamTensor t{name, shape, std::vector<float>(shape_size(shape), 0.0F)};
    if (shape.size() > 1)
    {
      std::size_t const fan_in = shape.size() == 4 ? shape[1] * shape[2] * shape[3] : shape[0];
      double const      bound  = std::sqrt(6.0 / static_cast<double>(fan_in));
      for (auto &v : t.values)
      {
        v = static_cast<float>(rng.uniform(-bound, bound));
      }
    }
    tensors.push_back(std::move(t));
  }
  return ModelParams(std::move(tensors));
}

Tensor make_batch(ClassifierSpec const &spec, std::vector<std::vector<float> const *> const &samples)
{
  if (samples.empty())
  {
    throw ContractError("make_batch: empty batch");
  }
  std::size_t const   per = shape_size(spec.input_shape);
  std::vector<double> values;
  values.reserve(per * samples.size());
  for (auto const *s : samples)
  {
    if (s->size() != per)
    {
      throw DimensionError("sample of " + std::to_string(s->size()) +
                           " values does not match input shape " + shape_str(spec.input_shape));
    }
    values.insert(values.end(), s->begin(), s->end());
  }
  Shape shape{samples.size()};
  shape.insert(shape.end(), spec.input_shape.begin(), spec.input_shape.end());
  return Tensor(std::move(shape), std::move(values));
}

std::vector<Var> bind_params(Graph &g, ModelParams const &params, bool requires_grad)
{
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i)
  {
    vars.push_back(g.leaf(params.as_tensor(i), requires_grad));
  }
  return vars;
}

Var forward(Graph &g, ClassifierSpec const &spec, std::vector<Var> const &params, Var batch)
{
  Shape const &in = g.value(batch).shape();
  if (in.size() != spec.input_shape.size() + 1 ||
      !std::equal(spec.input_shape.begin(), spec.input_shape.end(), in.begin() + 1))
  {
    throw DimensionError("input batch " + shape_str(in) + " does not match model input " +
                         shape_str(spec.input_shape));
  }
  std::size_t const batch_size = in[0];
  std::size_t       next       = 0;
  Var               h          = batch;
  if (spec.kind == ModelKind::SmallCnn)
  {
    for (std::size_t i = 0; i < 2; ++i)
    {
      h = g.conv2d(h, params.at(next), kConvStride, kConvPadding);
      h = g.add_channel_bias(h, params.at(next + 1));
      h = g.relu(h);
      next += 2;
    }
    h = g.reshape(h, {batch_size, g.value(h).size() / batch_size});
  }
  std::size_t const dense_layers = spec.hidden.size() + 1;
  for (std::size_t i = 0; i < dense_layers; ++i)
  {
    h = g.matmul(h, params.at(next));
    h = g.add(h, params.at(next + 1));
    if (i + 1 < dense_layers)
    {
      h = g.relu(h);
    }
    next += 2;
  }
  if (next != params.size())
  {
    throw ContractError("forward: got " + std::to_string(params.size()) + " parameters, model uses " +
                        std::to_string(next));
  }
  return h;
}

Tensor predict_batch(ClassifierSpec const &spec, ModelParams const &params, Tensor const &batch)
{
  Graph      g;
  auto const vars   = bind_params(g, params, false);
  Var const  logits = forward(g, spec, vars, g.constant(batch));
  return kernels::softmax(g.value(logits));
}

Tensor predict(ClassifierSpec const &spec, ModelParams const &params, Tensor const &x)
{
  if (x.shape() != spec.input_shape)
  {
    throw DimensionError("predict: input " + shape_str(x.shape()) + " does not match model input " +
                         shape_str(spec.input_shape));
  }
  Shape batched{1};
  batched.insert(batched.end(), x.shape().begin(), x.shape().end());
  Tensor probs = predict_batch(spec, params, x.reshaped(batched));
  return probs.reshaped({spec.num_classes});
}

}  // namespace semifed
