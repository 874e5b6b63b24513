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

#include "semifed/params.hpp"

#include <vector>

namespace semifed {

struct SgdConfig
{
  float learning_rate{0.3F};
  float momentum{0.9F};
  float l2_coeff{1e-4F};
};

/// Velocity buffers mirror the parameter layout they were created for.
struct OptimState
{
  SgdConfig                       config;
  std::vector<std::vector<float>> velocity;
};

OptimState make_optim_state(ModelParams const &params, SgdConfig const &config);

/**
 * One SGD step with Nesterov momentum and coupled L2, per scalar weight w:
 *
 *   g' = g + l2 * w
 *   v  = momentum * v + g'
 *   w  = w - lr * (g' + momentum * v)
 *
 * Scalar trace with momentum 0.9, lr 0.1, g = 1, w0 = 0:
 *   step 1: v = 1,   w = -0.1 * (1 + 0.9)  = -0.19
 *   step 2: v = 1.9, w = -0.19 - 0.1 * (1 + 1.71) = -0.461
 *
 * Arithmetic is done in float on the stored parameters. Throws ContractError if a parameter
 * has no gradient or the gradient shape differs, DomainError if an updated weight is not finite.
 */
ModelParams sgd_step(ModelParams const &params, GradMap const &grads, OptimState &state);

}  // namespace semifed
