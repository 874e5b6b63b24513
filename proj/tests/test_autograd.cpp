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

#include "gradcheck.hpp"

#include "semifed/autograd.hpp"
#include "semifed/error.hpp"
#include "semifed/rng.hpp"

#include <gtest/gtest.h>

using namespace semifed;
using semifed::testing::GraphFn;
using semifed::testing::max_grad_error;

namespace {

Tensor random_tensor(Shape shape, Rng &rng, double lo = -1.0, double hi = 1.0)
{
  Tensor t = Tensor::zeros(std::move(shape));
  for (auto &v : t.values())
  {
    v = rng.uniform(lo, hi);
  }
  return t;
}

// relu kinks break finite differences; keep inputs away from zero
Tensor away_from_zero(Shape shape, Rng &rng)
{
  Tensor t = Tensor::zeros(std::move(shape));
  for (auto &v : t.values())
  {
    double const m = rng.uniform(0.1, 1.0);
    v              = rng.uniform() < 0.5 ? -m : m;
  }
  return t;
}

}  // namespace

TEST(Backward, MeanIsUniform)
{
  Graph g;
  Var   x     = g.leaf(Tensor::vector({1, 2, 3, 4}));
  auto  grads = g.backward(g.mean(x));
  for (double v : grads.of(x).values())
  {
    EXPECT_EQ(v, 0.25);
  }
}

TEST(Backward, ReluGate)
{
  Graph g;
  Var   x     = g.leaf(Tensor::vector({-1, 2}));
  auto  grads = g.backward(g.sum(g.relu(x)));
  EXPECT_EQ(grads.of(x)[0], 0.0);
  EXPECT_EQ(grads.of(x)[1], 1.0);
}

TEST(Backward, NonScalarLoss)
{
  Graph g;
  Var   x = g.leaf(Tensor::vector({1, 2}));
  EXPECT_THROW(g.backward(g.relu(x)), ContractError);
}

TEST(Backward, ConstantsGetNoGradient)
{
  Graph g;
  Var   x     = g.leaf(Tensor::vector({1, 2}));
  Var   c     = g.constant(Tensor::vector({3, 4}));
  auto  grads = g.backward(g.sum(g.mul(x, c)));
  EXPECT_FALSE(grads.has(c));
  EXPECT_EQ(grads.of(x)[0], 3.0);
  EXPECT_EQ(grads.of(x)[1], 4.0);
}

TEST(Backward, TapeIsTopological)
{
  Graph g;
  Var   x = g.leaf(Tensor::matrix(2, 2, {1, 2, 3, 4}));
  Var   y = g.matmul(x, x);
  g.sum(g.softmax(g.add(y, x)));
  for (std::size_t i = 0; i < g.size(); ++i)
  {
    for (auto in : g.node(Var{i}).inputs)
    {
      EXPECT_LT(in, i);
    }
  }
}

TEST(Backward, ReusedNodeAccumulates)
{
  Graph g;
  Var   x     = g.leaf(Tensor::scalar(3.0));
  auto  grads = g.backward(g.sum(g.mul(x, x)));
  EXPECT_EQ(grads.of(x)[0], 6.0);
}

// One primitive per graph, with random shapes.
TEST(GradCheck, RandomPrimitiveGraphs)
{
  Rng rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial)
  {
    std::size_t const m = 1 + rng.below(4), n = 1 + rng.below(4), p = 1 + rng.below(4);
    GraphFn           fn;
    std::vector<Tensor> leaves;
    switch (trial % 11)
    {
    case 0:
      leaves = {random_tensor({m, n}, rng), random_tensor({n, p}, rng), random_tensor({m, p}, rng)};
      fn     = [](Graph &g, auto const &v) { return g.sum(g.mul(g.matmul(v[0], v[1]), v[2])); };
      break;
    case 1:
    {
      std::size_t const cin = 1 + rng.below(2), cout = 1 + rng.below(2), stride = 1 + rng.below(2);
      std::size_t const pad = rng.below(2);
      leaves = {random_tensor({2, cin, 4, 5}, rng), random_tensor({cout, cin, 3, 3}, rng)};
      Tensor weights = random_tensor({2, cout, (4 + 2 * pad - 3) / stride + 1, (5 + 2 * pad - 3) / stride + 1}, rng);
      fn = [=](Graph &g, auto const &v) { return g.sum(g.mul(g.conv2d(v[0], v[1], stride, pad), g.constant(weights))); };
      break;
    }
    case 2:
    {
      leaves         = {away_from_zero({m, n}, rng)};
      Tensor weights = random_tensor({m, n}, rng);
      fn = [=](Graph &g, auto const &v) { return g.sum(g.mul(g.relu(v[0]), g.constant(weights))); };
      break;
    }
    case 3:
      leaves = {random_tensor({m, n}, rng)};
      fn     = [](Graph &g, auto const &v) { return g.mean(g.exp(v[0])); };
      break;
    case 4:
      leaves = {random_tensor({m, n}, rng, 0.2, 3.0)};
      fn     = [](Graph &g, auto const &v) { return g.sum(g.log(v[0])); };
      break;
    case 5:
      leaves = {random_tensor({m, n}, rng), random_tensor({n}, rng)};
      fn     = [](Graph &g, auto const &v) { return g.sum(g.mul(g.add(v[0], v[1]), g.add(v[0], v[1]))); };
      break;
    case 6:
    {
      double const s = rng.uniform(-3, 3);
      leaves         = {random_tensor({m, n}, rng)};
      fn = [=](Graph &g, auto const &v) { return g.sum(g.mul(g.scale(v[0], s), v[0])); };
      break;
    }
    case 7:
    {
      leaves = {random_tensor({2, m, 3, 2}, rng), random_tensor({m}, rng)};
      Tensor weights = random_tensor({2, m, 3, 2}, rng);
      fn = [=](Graph &g, auto const &v) {
        return g.sum(g.mul(g.add_channel_bias(v[0], v[1]), g.constant(weights)));
      };
      break;
    }
    case 8:
    {
      leaves         = {random_tensor({m, n + 1}, rng, -3, 3)};
      Tensor weights = random_tensor({m, n + 1}, rng);
      fn = [=](Graph &g, auto const &v) { return g.sum(g.mul(g.softmax(v[0]), g.constant(weights))); };
      break;
    }
    case 9:
    {
      leaves = {random_tensor({m, n + 1}, rng, -3, 3)};
      std::vector<std::size_t> picks(m);
      for (auto &c : picks)
      {
        c = rng.below(n + 1);
      }
      fn = [=](Graph &g, auto const &v) { return g.mean(g.pick(g.log_softmax(v[0]), picks)); };
      break;
    }
    default:
    {
      leaves         = {random_tensor({m * n}, rng)};
      Tensor weights = random_tensor({m, n}, rng);
      fn = [=](Graph &g, auto const &v) { return g.sum(g.mul(g.reshape(v[0], {m, n}), g.constant(weights))); };
      break;
    }
    }
    EXPECT_LT(max_grad_error(fn, leaves), 1e-4) << "trial " << trial;
    ++checked;
  }
  EXPECT_EQ(checked, 100);
}

TEST(GradCheck, ThreeLayerNet)
{
  Rng    rng(7);
  Tensor x  = random_tensor({5, 3}, rng);
  GraphFn fn = [&](Graph &g, std::vector<Var> const &v) {
    Var h1 = g.relu(g.add(g.matmul(g.constant(x), v[0]), v[1]));
    Var h2 = g.relu(g.add(g.matmul(h1, v[2]), v[3]));
    Var z  = g.add(g.matmul(h2, v[4]), v[5]);
    return g.mean(g.pick(g.log_softmax(z), {0, 1, 2, 0, 1}));
  };
  std::vector<Tensor> leaves{random_tensor({3, 6}, rng), random_tensor({6}, rng),  random_tensor({6, 6}, rng),
                             random_tensor({6}, rng),    random_tensor({6, 3}, rng), random_tensor({3}, rng)};
  EXPECT_LT(max_grad_error(fn, leaves), 1e-4);
}
