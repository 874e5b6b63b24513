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

#include "semifed/augment.hpp"
#include "semifed/flcore.hpp"
#include "semifed/loss.hpp"
#include "semifed/rng.hpp"

#include <numeric>
#include <vector>

namespace semifed::testing {

/**
 * Plain single-machine training loop over one dataset, drawing batches the way the client
 * update documents it: labeled permutation first, then per epoch an unlabeled shuffle, the
 * labeled permutation redrawn when short, fresh momentum each round. No serialization, no
 * aggregation.
 */
inline ModelParams centralized_training(ClassifierSpec const &spec, ClientDataset const &data, ModelParams params,
                                        RoundPlan const &plan, std::uint64_t seed, std::uint64_t seed_key,
                                        std::size_t rounds)
{
  std::size_t const n_l = data.labeled.size();
  std::size_t const n_u = data.unlabeled.size();
  for (std::size_t t = 0; t < rounds; ++t)
  {
    std::uint64_t const round_seed = client_round_seed(seed, seed_key, t);
    Rng                 draw(derive_seed(round_seed, 0));
    Rng                 noise(derive_seed(round_seed, 1));
    OptimState          state = make_optim_state(params, plan.sgd);
    Perturbation        perturb = [&](Tensor const &x) {
      return perturb_batch(x, plan.augment, plan.noise_sigma, noise);
    };

    std::size_t const        bl = std::min(plan.batch_labeled, n_l);
    std::vector<std::size_t> perm(n_l);
    std::size_t              cursor = 0;
    auto                     redraw = [&] {
      std::iota(perm.begin(), perm.end(), 0);
      draw.shuffle(perm);
      cursor = 0;
    };
    if (n_l > 0)
    {
      redraw();
    }
    std::size_t const steps = n_u > 0 ? (n_u + plan.batch_unlabeled - 1) / plan.batch_unlabeled
                                      : (n_l + plan.batch_labeled - 1) / plan.batch_labeled;
    std::vector<std::size_t> uorder(n_u);
    for (std::size_t e = 0; e < plan.epochs; ++e)
    {
      std::iota(uorder.begin(), uorder.end(), 0);
      draw.shuffle(uorder);
      for (std::size_t s = 0; s < steps; ++s)
      {
        LabeledBatch lb;
        bool         has_l = n_l > 0;
        if (has_l)
        {
          if (cursor + bl > n_l)
          {
            redraw();
          }
          std::vector<double> xs;
          for (std::size_t i = cursor; i < cursor + bl; ++i)
          {
            auto const &ex = data.labeled[perm[i]];
            xs.insert(xs.end(), ex.features.begin(), ex.features.end());
            lb.labels.push_back(static_cast<std::size_t>(ex.label));
          }
          cursor += bl;
          Shape shape{bl};
          shape.insert(shape.end(), spec.input_shape.begin(), spec.input_shape.end());
          lb.inputs = Tensor(shape, xs);
          if (plan.weak_augment_labeled)
          {
            lb.inputs = weak_augment_batch(lb.inputs, noise);
          }
        }
        Tensor ub;
        bool   has_u = n_u > 0;
        if (has_u)
        {
          std::size_t const   lo = s * plan.batch_unlabeled;
          std::size_t const   hi = std::min(n_u, lo + plan.batch_unlabeled);
          std::vector<double> xs;
          for (std::size_t i = lo; i < hi; ++i)
          {
            auto const &ex = data.unlabeled[uorder[i]];
            xs.insert(xs.end(), ex.features.begin(), ex.features.end());
          }
          Shape shape{hi - lo};
          shape.insert(shape.end(), spec.input_shape.begin(), spec.input_shape.end());
          ub = Tensor(shape, xs);
        }
        params = combined_step(spec, params, has_l ? &lb : nullptr, has_u ? &ub : nullptr, plan.lambda_u, perturb,
                               state, plan.consistency)
                     .params;
      }
    }
  }
  return params;
}

}  // namespace semifed::testing
