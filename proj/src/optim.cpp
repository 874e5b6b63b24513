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

#include "semifed/optim.hpp"

#include "semifed/error.hpp"

#include <cmath>

namespace semifed {

OptimState make_optim_state(ModelParams const &params, SgdConfig const &config)
{
  if (!(config.learning_rate >= 0.0F) || !(config.momentum >= 0.0F && config.momentum < 1.0F) ||
      !(config.l2_coeff >= 0.0F))
  {
    throw ContractError("sgd: need lr >= 0, momentum in [0,1), l2 >= 0");
  }
  OptimState state{config, {}};
  for (auto const &t : params.tensors())
  {
    state.velocity.emplace_back(t.values.size(), 0.0F);
  }
  return state;
}

ModelParams sgd_step(ModelParams const &params, GradMap const &grads, OptimState &state)
{
  if (state.velocity.size() != params.size())
  {
    throw ContractError("sgd: optimizer state built for a different model");
  }
  float const lr = state.config.learning_rate;
  float const mu = state.config.momentum;
  float const l2 = state.config.l2_coeff;

  ModelParams out = params;
  for (std::size_t i = 0; i < out.size(); ++i)
  {
    auto &p  = out[i];
    auto  it = grads.find(p.name);
    if (it == grads.end())
    {
      throw ContractError("sgd: missing gradient for parameter '" + p.name + "'");
    }
    if (it->second.shape() != p.shape)
    {
      throw ContractError("sgd: gradient for '" + p.name + "' has shape " +
                          shape_str(it->second.shape()) + ", expected " + shape_str(p.shape));
    }
    auto &v = state.velocity[i];
    if (v.size() != p.values.size())
    {
      throw ContractError("sgd: velocity for '" + p.name + "' does not mirror the parameter");
    }
    for (std::size_t j = 0; j < p.values.size(); ++j)
    {
      float const g = static_cast<float>(it->second[j]) + l2 * p.values[j];
      v[j]          = mu * v[j] + g;
      p.values[j]   = p.values[j] - lr * (g + mu * v[j]);
      if (!std::isfinite(p.values[j]))
      {
        throw DomainError("sgd: update of '" + p.name + "' is not finite (training diverged)");
      }
    }
  }
  return out;
}

}  // namespace semifed
