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

#include "semifed/loss.hpp"

#include "semifed/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace semifed {

namespace {

std::size_t argmax_row(Tensor const &logits, std::size_t row)
{
  std::size_t const cols = logits.dim(1);
  std::size_t       best = 0;
  for (std::size_t c = 1; c < cols; ++c)
  {
    if (logits.at(row, c) > logits.at(row, best))
    {
      best = c;
    }
  }
  return best;
}

}  // namespace

ObjectiveResult evaluate_objective(ClassifierSpec const &spec, ModelParams const &params,
                                   LabeledBatch const *labeled, Tensor const *unlabeled,
                                   double lambda_u, Perturbation const &perturb,
                                   ConsistencyOptions const &options)
{
  ObjectiveResult result;
  result.losses.lambda_u = lambda_u;

  bool const use_consistency = unlabeled != nullptr && lambda_u != 0.0;
  if (labeled == nullptr && !use_consistency)
  {
    return result;
  }

  Graph      g;
  auto const vars = bind_params(g, params, true);
  std::optional<Var> total;

  if (labeled != nullptr)
  {
    if (labeled->labels.size() != labeled->inputs.dim(0))
    {
      throw ContractError("labeled batch: label count does not match batch size");
    }
    for (auto y : labeled->labels)
    {
      if (y >= spec.num_classes)
      {
        throw LabelError("label " + std::to_string(y) + " out of range [0," +
                         std::to_string(spec.num_classes) + ")");
      }
    }
    Var const logits = forward(g, spec, vars, g.constant(labeled->inputs));
    Var const nll    = g.scale(g.mean(g.pick(g.log_softmax(logits), labeled->labels)), -1.0);
    result.losses.l_s = g.value(nll).item();
    total             = nll;
    for (std::size_t b = 0; b < labeled->labels.size(); ++b)
    {
      result.labeled_correct += argmax_row(g.value(logits), b) == labeled->labels[b] ? 1 : 0;
    }
  }

  if (use_consistency)
  {
    Tensor const perturbed = perturb(*unlabeled);
    if (perturbed.shape() != unlabeled->shape())
    {
      throw DimensionError("perturbation changed batch shape " + shape_str(unlabeled->shape()) +
                           " to " + shape_str(perturbed.shape()));
    }
    auto const   batch_size   = static_cast<double>(unlabeled->dim(0));
    Var const    clean_logits = forward(g, spec, vars, g.constant(*unlabeled));
    Var const    noisy_logits = forward(g, spec, vars, g.constant(perturbed));
    Var const    log_q        = g.log_softmax(noisy_logits);
    Var          kl{};
    if (options.stop_gradient_on_target)
    {
      Tensor const log_p = kernels::log_softmax(g.value(clean_logits));
      Tensor const p     = kernels::softmax(g.value(clean_logits));
      double const entropy_term = kernels::sum(kernels::mul(p, log_p));
      Var const    cross        = g.sum(g.mul(g.constant(p), log_q));
      kl = g.add(g.scale(cross, -1.0 / batch_size), g.constant(Tensor::scalar(entropy_term / batch_size)));
    }
    else
    {
      Var const log_p = g.log_softmax(clean_logits);
      Var const p     = g.softmax(clean_logits);
      kl = g.scale(g.sum(g.mul(p, g.add(log_p, g.scale(log_q, -1.0)))), 1.0 / batch_size);
    }
    // KL is nonnegative; the two-sum form can round a few ulps below zero
    result.losses.l_u = std::max(0.0, g.value(kl).item());
    Var const weighted = g.scale(kl, lambda_u);
    total              = total ? g.add(*total, weighted) : weighted;
  }

  result.losses.total = result.losses.l_s.value_or(0.0) + lambda_u * result.losses.l_u.value_or(0.0);
  Gradients const grads = g.backward(*total);
  for (std::size_t i = 0; i < params.size(); ++i)
  {
    result.grads.emplace(params[i].name, grads.has(vars[i]) ? grads.of(vars[i])
                                                            : Tensor::zeros(params[i].shape));
  }
  return result;
}

LossResult supervised_loss(ClassifierSpec const &spec, ModelParams const &params,
                           LabeledBatch const &batch)
{
  auto r = evaluate_objective(spec, params, &batch, nullptr, 0.0, {});
  return {*r.losses.l_s, std::move(r.grads)};
}

LossResult consistency_loss(ClassifierSpec const &spec, ModelParams const &params,
                            Tensor const &unlabeled, Perturbation const &perturb,
                            ConsistencyOptions const &options)
{
  auto r = evaluate_objective(spec, params, nullptr, &unlabeled, 1.0, perturb, options);
  return {*r.losses.l_u, std::move(r.grads)};
}

StepResult combined_step(ClassifierSpec const &spec, ModelParams const &params,
                         LabeledBatch const *labeled, Tensor const *unlabeled, double lambda_u,
                         Perturbation const &perturb, OptimState &state,
                         ConsistencyOptions const &options)
{
  auto objective = evaluate_objective(spec, params, labeled, unlabeled, lambda_u, perturb, options);
  if (!objective.losses.l_s && !objective.losses.l_u)
  {
    return {params, objective.losses, 0};
  }
  return {sgd_step(params, objective.grads, state), objective.losses, objective.labeled_correct};
}

double cross_entropy(std::span<double const> probs, std::size_t label)
{
  if (label >= probs.size())
  {
    throw LabelError("label " + std::to_string(label) + " out of range");
  }
  if (probs[label] <= 0.0)
  {
    return std::numeric_limits<double>::infinity();
  }
  return -std::log(probs[label]);
}

double kl_divergence(std::span<double const> p, std::span<double const> q)
{
  if (p.size() != q.size())
  {
    throw DimensionError("kl_divergence: distributions of different length");
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
  {
    if (p[i] > 0.0)
    {
      if (q[i] <= 0.0)
      {
        return std::numeric_limits<double>::infinity();
      }
      kl += p[i] * std::log(p[i] / q[i]);
    }
  }
  return kl;
}

}  // namespace semifed
