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

#include "semifed/model.hpp"
#include "semifed/optim.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace semifed {

/// Maps a clean input batch [B, ...] to its perturbed counterpart of the same shape.
using Perturbation = std::function<Tensor(Tensor const &)>;

struct LabeledBatch
{
  Tensor                   inputs;  // [B, ...]
  std::vector<std::size_t> labels;  // B entries in [0, C)
};

/// Loss values of one objective evaluation. A term that was not evaluated is empty.
struct LossBundle
{
  std::optional<double> l_s;
  std::optional<double> l_u;
  double                lambda_u{0.0};
  double                total{0.0};  // l_s + lambda_u * l_u over the terms present
};

struct ConsistencyOptions
{
  /// Treat the clean prediction as a fixed target (no gradient through it).
  bool stop_gradient_on_target{true};
};

struct LossResult
{
  double  value{0.0};
  GradMap grads;
};

/// Mean cross-entropy -log p(y|x) over the batch. Labels outside [0, C) raise LabelError.
LossResult supervised_loss(ClassifierSpec const &spec, ModelParams const &params,
                           LabeledBatch const &batch);

/// Mean over the batch of KL(p(y|x) || p(y|perturb(x))).
LossResult consistency_loss(ClassifierSpec const &spec, ModelParams const &params,
                            Tensor const &unlabeled, Perturbation const &perturb,
                            ConsistencyOptions const &options = {});

struct ObjectiveResult
{
  LossBundle  losses;
  GradMap     grads;
  std::size_t labeled_correct{0};  // argmax hits on the labeled batch
};

/**
 * Evaluates l_s + lambda_u * l_u and its gradient in one graph.
 *
 * Either batch may be absent; the corresponding term is then skipped. The consistency term
 * is also skipped when lambda_u == 0, so perturb is not called in that case.
 */
ObjectiveResult evaluate_objective(ClassifierSpec const &spec, ModelParams const &params,
                                   LabeledBatch const *labeled, Tensor const *unlabeled,
                                   double lambda_u, Perturbation const &perturb,
                                   ConsistencyOptions const &options = {});

struct StepResult
{
  ModelParams params;
  LossBundle  losses;
  std::size_t labeled_correct{0};
};

/// One optimizer step on l_s + lambda_u * l_u. With no term to evaluate the params come back unchanged.
StepResult combined_step(ClassifierSpec const &spec, ModelParams const &params,
                         LabeledBatch const *labeled, Tensor const *unlabeled, double lambda_u,
                         Perturbation const &perturb, OptimState &state,
                         ConsistencyOptions const &options = {});

/// -log probs[label] for a probability vector.
double cross_entropy(std::span<double const> probs, std::size_t label);

/// sum_c p_c log(p_c / q_c); zero-probability entries of p contribute nothing.
double kl_divergence(std::span<double const> p, std::span<double const> q);

}  // namespace semifed
