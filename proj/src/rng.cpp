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

#include "semifed/rng.hpp"

#include <cmath>
#include <numbers>

namespace semifed {

std::uint64_t Rng::below(std::uint64_t n)
{
  // rejection sampling removes modulo bias
  std::uint64_t const limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t r{};
  do
  {
    r = engine_();
  } while (r >= limit);
  return r % n;
}

double Rng::normal()
{
  double u1 = uniform();
  while (u1 <= 0.0)
  {
    u1 = uniform();
  }
  double const u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::gamma(double shape)
{
  if (shape < 1.0)
  {
    double u = uniform();
    while (u <= 0.0)
    {
      u = uniform();
    }
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  double const d = shape - 1.0 / 3.0;
  double const c = 1.0 / std::sqrt(9.0 * d);
  for (;;)
  {
    double x{};
    double v{};
    do
    {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    double const u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x)
    {
      return d * v;
    }
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
    {
      return d * v;
    }
  }
}

std::vector<double> Rng::dirichlet(std::size_t k, double alpha)
{
  std::vector<double> p(k);
  double total = 0.0;
  for (auto &x : p)
  {
    x = gamma(alpha);
    total += x;
  }
  if (total <= 0.0)
  {
    // every gamma underflowed (tiny alpha); put all mass on one coordinate
    p.assign(k, 0.0);
    p[below(k)] = 1.0;
    return p;
  }
  for (auto &x : p)
  {
    x /= total;
  }
  return p;
}

}  // namespace semifed
