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

#include "semifed/error.hpp"
#include "semifed/rng.hpp"
#include "semifed/tensor.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace semifed;
namespace k = semifed::kernels;

namespace {

void expect_values(Tensor const &t, std::vector<double> const &want, double tol = 0.0)
{
  ASSERT_EQ(t.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i)
  {
    EXPECT_NEAR(t[i], want[i], tol) << "index " << i;
  }
}

}  // namespace

TEST(Tensor, ShapeMustMatchValues)
{
  EXPECT_THROW(Tensor({2, 2}, {1, 2, 3}), DimensionError);
  EXPECT_THROW(Tensor({0}, {}), DimensionError);
  Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(t.size(), 6U);
  EXPECT_EQ(t.at(1, 2), 6.0);
}

TEST(Tensor, Reshape)
{
  auto t = Tensor::vector({1, 2, 3, 4}).reshaped({2, 2});
  EXPECT_EQ(t.shape(), (Shape{2, 2}));
  EXPECT_THROW(t.reshaped({3}), DimensionError);
}

TEST(Matmul, IdentityLeavesMatrix)
{
  auto b = Tensor::matrix(2, 2, {3, 4, 5, 6});
  EXPECT_EQ(k::matmul(Tensor::matrix(2, 2, {1, 0, 0, 1}), b), b);
}

TEST(Matmul, ZeroMatrix)
{
  auto c = k::matmul(Tensor::matrix(2, 2, {1, 2, 3, 4}), Tensor::zeros({2, 2}));
  expect_values(c, {0, 0, 0, 0});
}

TEST(Matmul, TwoByTwo)
{
  auto c = k::matmul(Tensor::matrix(2, 2, {1, 2, 3, 4}), Tensor::matrix(2, 2, {5, 6, 7, 8}));
  expect_values(c, {19, 22, 43, 50});
}

TEST(Matmul, MismatchNamesBothShapes)
{
  try
  {
    k::matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 3}));
    FAIL();
  }
  catch (DimensionError const &e)
  {
    std::string msg = e.what();
    EXPECT_NE(msg.find("[2,3]"), std::string::npos) << msg;
  }
}

TEST(Conv2d, OnesSumToNine)
{
  auto y = k::conv2d(Tensor::filled({1, 3, 3}, 1.0), Tensor::filled({1, 1, 3, 3}, 1.0), 1, 0);
  EXPECT_EQ(y.shape(), (Shape{1, 1, 1}));
  EXPECT_EQ(y[0], 9.0);
}

TEST(Conv2d, ZeroKernel)
{
  Rng    rng(3);
  Tensor x = Tensor::zeros({2, 5, 5});
  for (auto &v : x.values())
  {
    v = rng.normal();
  }
  auto y = k::conv2d(x, Tensor::zeros({3, 2, 3, 3}), 1, 1);
  EXPECT_EQ(y.shape(), (Shape{3, 5, 5}));
  for (double v : y.values())
  {
    EXPECT_EQ(v, 0.0);
  }
}

TEST(Conv2d, RampStrideTwo)
{
  std::vector<double> ramp(16);
  for (int i = 0; i < 16; ++i)
  {
    ramp[i] = i;
  }
  auto y = k::conv2d(Tensor({1, 4, 4}, ramp), Tensor::filled({1, 1, 2, 2}, 1.0), 2, 0);
  EXPECT_EQ(y.shape(), (Shape{1, 2, 2}));
  expect_values(y, {10, 18, 42, 50});
}

TEST(Conv2d, OutputSizeFormula)
{
  auto y = k::conv2d(Tensor::zeros({1, 7, 6}), Tensor::zeros({1, 1, 3, 2}), 2, 1);
  // floor((7+2-3)/2)+1 = 4, floor((6+2-2)/2)+1 = 4
  EXPECT_EQ(y.shape(), (Shape{1, 4, 4}));
}

TEST(Conv2d, KernelLargerThanPaddedInput)
{
  EXPECT_THROW(k::conv2d(Tensor::zeros({1, 2, 2}), Tensor::zeros({1, 1, 5, 5}), 1, 1), DimensionError);
  EXPECT_THROW(k::conv2d(Tensor::zeros({2, 4, 4}), Tensor::zeros({1, 1, 3, 3}), 1, 1), DimensionError);
}

TEST(Conv2d, BatchedMatchesPerSample)
{
  Rng    rng(9);
  Tensor x = Tensor::zeros({3, 2, 5, 5});
  Tensor w = Tensor::zeros({4, 2, 3, 3});
  for (auto &v : x.values())
  {
    v = rng.normal();
  }
  for (auto &v : w.values())
  {
    v = rng.normal();
  }
  auto y = k::conv2d(x, w, 2, 1);
  ASSERT_EQ(y.shape(), (Shape{3, 4, 3, 3}));
  for (std::size_t b = 0; b < 3; ++b)
  {
    std::vector<double> xb(x.values().begin() + b * 50, x.values().begin() + (b + 1) * 50);
    auto                yb = k::conv2d(Tensor({2, 5, 5}, xb), w, 2, 1);
    for (std::size_t i = 0; i < yb.size(); ++i)
    {
      EXPECT_EQ(yb[i], y[b * 36 + i]);
    }
  }
}

TEST(Elementwise, Relu)
{
  expect_values(k::relu(Tensor::vector({-1, 0, 2})), {0, 0, 2});
}

TEST(Elementwise, Mean)
{
  EXPECT_EQ(k::mean(Tensor::vector({2, 4, 6})), 4.0);
  EXPECT_EQ(k::sum(Tensor::vector({2, 4, 6})), 12.0);
}

TEST(Elementwise, ExpLogInverse)
{
  EXPECT_NEAR(k::exp(k::log(Tensor::scalar(0.37)))[0], 0.37, 1e-12);
}

TEST(Elementwise, LogOfNonPositive)
{
  EXPECT_THROW(k::log(Tensor::vector({1.0, 0.0})), DomainError);
  EXPECT_THROW(k::log(Tensor::vector({-2.0})), DomainError);
}

TEST(Elementwise, AddBroadcastsLeadingAxisOnly)
{
  auto a = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  expect_values(k::add(a, Tensor::vector({10, 20, 30})), {11, 22, 33, 14, 25, 36});
  EXPECT_THROW(k::add(a, Tensor::vector({1, 2})), DimensionError);
  EXPECT_THROW(k::add(a, Tensor::matrix(3, 2, {1, 2, 3, 4, 5, 6})), DimensionError);
  EXPECT_THROW(k::mul(a, Tensor::vector({1, 2, 3, 4, 5, 6})), DimensionError);
}

TEST(Elementwise, Scale)
{
  expect_values(k::scale(Tensor::vector({1, -2}), 3.0), {3, -6});
}

TEST(Softmax, Symmetric)
{
  expect_values(k::softmax(Tensor::vector({0, 0})), {0.5, 0.5});
}

TEST(Softmax, LargeLogitDoesNotOverflow)
{
  auto p = k::softmax(Tensor::vector({1000, 0}));
  EXPECT_TRUE(std::isfinite(p[0]) && std::isfinite(p[1]));
  EXPECT_NEAR(p[0], 1.0, 1e-12);
  EXPECT_NEAR(p[1], 0.0, 1e-12);
}

TEST(Softmax, KnownValues)
{
  auto p = k::softmax(Tensor::vector({1, 2, 3}));
  expect_values(p, {0.09003, 0.24473, 0.66524}, 1e-5);
}

TEST(Softmax, RowsSumToOne)
{
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial)
  {
    std::size_t const   c = 1 + rng.below(12);
    std::vector<double> z(3 * c);
    for (auto &v : z)
    {
      v = rng.normal(0.0, 30.0);
    }
    auto p = k::softmax(Tensor::matrix(3, c, z));
    for (std::size_t r = 0; r < 3; ++r)
    {
      double total = 0.0;
      for (std::size_t j = 0; j < c; ++j)
      {
        EXPECT_GE(p.at(r, j), 0.0);
        EXPECT_LE(p.at(r, j), 1.0);
        total += p.at(r, j);
      }
      EXPECT_NEAR(total, 1.0, 1e-9);
    }
  }
}

TEST(Softmax, LogSoftmaxConsistent)
{
  auto z  = Tensor::vector({0.3, -1.2, 4.0, 2.5});
  auto p  = k::softmax(z);
  auto lp = k::log_softmax(z);
  for (std::size_t i = 0; i < 4; ++i)
  {
    EXPECT_NEAR(std::exp(lp[i]), p[i], 1e-14);
  }
}

TEST(Kernels, Deterministic)
{
  Rng    rng(5);
  Tensor x = Tensor::zeros({2, 3, 6, 6});
  Tensor w = Tensor::zeros({2, 3, 3, 3});
  for (auto &v : x.values())
  {
    v = rng.normal();
  }
  for (auto &v : w.values())
  {
    v = rng.normal();
  }
  EXPECT_EQ(k::conv2d(x, w, 2, 1), k::conv2d(x, w, 2, 1));
}
