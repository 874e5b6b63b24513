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

#include "semifed/autograd.hpp"
#include "semifed/params.hpp"
#include "semifed/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace semifed {

enum class ModelKind
{
  Mlp,
  SmallCnn,
};

std::string to_string(ModelKind kind);
ModelKind   parse_model_kind(std::string const &s);

/**
 * Architecture of the classifier.
 *
 * mlp:       input_shape = [dim]; dense layers dim -> hidden... -> num_classes, relu between.
 * small-cnn: input_shape = [C,H,W]; two 3x3 stride-2 pad-1 convolutions with `channels`
 *            output channels each, one dense hidden layer of width hidden[0], then the
 *            output layer.
 */
struct ClassifierSpec
{
  ModelKind                kind{ModelKind::Mlp};
  Shape                    input_shape;
  std::vector<std::size_t> hidden;
  std::vector<std::size_t> channels;
  std::size_t              num_classes{0};

  /// Builds an mlp from its full width list, e.g. {2, 8, 2}.
  static ClassifierSpec mlp(std::vector<std::size_t> const &widths);
  static ClassifierSpec small_cnn(Shape input_shape, std::size_t c1, std::size_t c2,
                                  std::size_t hidden_width, std::size_t num_classes);

  /// Throws SpecError on zero widths, a wrong channel list or an input shape of the wrong rank.
  void validate() const;

  bool operator==(ClassifierSpec const &) const = default;
};

/// Names and shapes of the parameters of spec, in order.
std::vector<std::pair<std::string, Shape>> parameter_layout(ClassifierSpec const &spec);

/// Weights ~ U(-b, b) with b = sqrt(6 / fan_in); biases zero. Deterministic per seed.
ModelParams init_model(ClassifierSpec const &spec, std::uint64_t seed);

/// Stacks samples of the spec's input shape into a [B, ...] batch tensor.
Tensor make_batch(ClassifierSpec const &spec, std::vector<std::vector<float> const *> const &samples);

/// Records the forward pass and returns logits [B, num_classes]. params must follow
/// parameter_layout(spec).
Var forward(Graph &g, ClassifierSpec const &spec, std::vector<Var> const &params, Var batch);

/// Adds params to g as leaves.
std::vector<Var> bind_params(Graph &g, ModelParams const &params, bool requires_grad);

/// Class probabilities for a single input of the spec's input shape.
Tensor predict(ClassifierSpec const &spec, ModelParams const &params, Tensor const &x);

/// Class probabilities [B, C] for a batch [B, ...].
Tensor predict_batch(ClassifierSpec const &spec, ModelParams const &params, Tensor const &batch);

}  // namespace semifed
