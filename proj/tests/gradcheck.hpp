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
#include "semifed/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace semifed::testing {

/// Loss as a function of the leaf values; builds a fresh graph each call.
using GraphFn = std::function<Var(Graph &, std::vector<Var> const &)>;

inline double eval_loss(GraphFn const &fn, std::vector<Tensor> const &leaves)
{
  Graph            g;
  std::vector<Var> vars;
  for (auto const &t : leaves)
  {
    vars.push_back(g.leaf(t));
  }
  return g.value(fn(g, vars)).item();
}

/// Largest relative error between backward() and central differences with step h.
/// Relative error is |a-n| / max(1, |a|, |n|).
inline double max_grad_error(GraphFn const &fn, std::vector<Tensor> const &leaves, double h = 1e-6)
{
  Graph            g;
  std::vector<Var> vars;
  for (auto const &t : leaves)
  {
    vars.push_back(g.leaf(t));
  }
  auto const grads = g.backward(fn(g, vars));
  double     worst = 0.0;
  for (std::size_t l = 0; l < leaves.size(); ++l)
  {
    Tensor const analytic = grads.has(vars[l]) ? grads.of(vars[l]) : Tensor::zeros(leaves[l].shape());
    for (std::size_t i = 0; i < leaves[l].size(); ++i)
    {
      auto plus  = leaves;
      auto minus = leaves;
      plus[l][i] += h;
      minus[l][i] -= h;
      double const numeric = (eval_loss(fn, plus) - eval_loss(fn, minus)) / (2.0 * h);
      double const scale   = std::max({1.0, std::abs(numeric), std::abs(analytic[i])});
      worst                = std::max(worst, std::abs(numeric - analytic[i]) / scale);
    }
  }
  return worst;
}

}  // namespace semifed::testing
