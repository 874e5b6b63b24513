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

#include "semifed/tensor.hpp"

#include "semifed/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace semifed {

std::size_t shape_size(Shape const &shape)
{
  std::size_t n = 1;
  for (auto d : shape)
  {
    n *= d;
  }
  return n;
}

std::string shape_str(Shape const &shape)
{
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i)
  {
    os << (i ? "," : "") << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, std::vector<double> values)
  : shape_(std::move(shape))
  , values_(std::move(values))
{
  if (shape_.empty())
  {
    throw DimensionError("tensor shape must have at least one axis");
  }
  for (auto d : shape_)
  {
    if (d == 0)
    {
      throw DimensionError("tensor dimensions must be positive, got " + shape_str(shape_));
    }
  }
  if (values_.size() != shape_size(shape_))
  {
    throw DimensionError("tensor of shape " + shape_str(shape_) + " needs " +
                         std::to_string(shape_size(shape_)) + " values, got " +
                         std::to_string(values_.size()));
  }
}

Tensor Tensor::filled(Shape shape, double v)
{
  std::size_t const n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(n, v));
}

Tensor Tensor::vector(std::vector<double> values)
{
  std::size_t const n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
{
  return Tensor({rows, cols}, std::move(values));
}

double Tensor::item() const
{
  if (values_.size() != 1)
  {
    throw ContractError("item() on a tensor of shape " + shape_str(shape_));
  }
  return values_[0];
}

Tensor Tensor::reshaped(Shape shape) const
{
  if (shape_size(shape) != values_.size())
  {
    throw DimensionError("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
  }
  return Tensor(std::move(shape), values_);
}

namespace kernels {

namespace {

void require_same_shape(char const *op, Tensor const &a, Tensor const &b)
{
  if (a.shape() != b.shape())
  {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
}

template <typename F>
Tensor map(Tensor const &a, F &&f)
{
  std::vector<double> out(a.size());
  auto                in = a.values();
  std::transform(in.begin(), in.end(), out.begin(), f);
  return Tensor(a.shape(), std::move(out));
}

struct ConvGeometry
{
  std::size_t batch, c_in, h, w, c_out, kh, kw, oh, ow;
};

ConvGeometry conv_geometry(Shape const &x, Shape const &k, std::size_t stride,
                           std::size_t padding)
{
  if (k.size() != 4)
  {
    throw DimensionError("conv2d: kernel must be [C_out,C_in,kh,kw], got " + shape_str(k));
  }
  if (x.size() != 3 && x.size() != 4)
  {
    throw DimensionError("conv2d: input must be [C,H,W] or [B,C,H,W], got " + shape_str(x));
  }
  if (stride == 0)
  {
    throw DimensionError("conv2d: stride must be positive");
  }
  std::size_t const off = x.size() - 3;
  ConvGeometry      g{};
  g.batch = off ? x[0] : 1;
  g.c_in  = x[off];
  g.h     = x[off + 1];
  g.w     = x[off + 2];
  g.c_out = k[0];
  g.kh    = k[2];
  g.kw    = k[3];
  if (k[1] != g.c_in)
  {
    throw DimensionError("conv2d: input channels " + shape_str(x) + " do not match kernel " +
                         shape_str(k));
  }
  if (g.kh > g.h + 2 * padding || g.kw > g.w + 2 * padding)
  {
    throw DimensionError("conv2d: kernel " + shape_str(k) + " larger than padded input " +
                         shape_str(x));
  }
  g.oh = (g.h + 2 * padding - g.kh) / stride + 1;
  g.ow = (g.w + 2 * padding - g.kw) / stride + 1;
  return g;
}

Shape conv_out_shape(Shape const &x, ConvGeometry const &g)
{
  if (x.size() == 4)
  {
    return {g.batch, g.c_out, g.oh, g.ow};
  }
  return {g.c_out, g.oh, g.ow};
}

// Calls f(b, co, oy, ox, ci, ky, kx, iy, ix) for every in-bounds tap.
template <typename F>
void for_each_tap(ConvGeometry const &g, std::size_t stride, std::size_t padding, F &&f)
{
  auto const pad = static_cast<std::ptrdiff_t>(padding);
  for (std::size_t b = 0; b < g.batch; ++b)
  {
    for (std::size_t co = 0; co < g.c_out; ++co)
    {
      for (std::size_t oy = 0; oy < g.oh; ++oy)
      {
        for (std::size_t ox = 0; ox < g.ow; ++ox)
        {
          for (std::size_t ci = 0; ci < g.c_in; ++ci)
          {
            for (std::size_t ky = 0; ky < g.kh; ++ky)
            {
              auto const iy = static_cast<std::ptrdiff_t>(oy * stride + ky) - pad;
              if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h))
              {
                continue;
              }
              for (std::size_t kx = 0; kx < g.kw; ++kx)
              {
                auto const ix = static_cast<std::ptrdiff_t>(ox * stride + kx) - pad;
                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w))
                {
                  continue;
                }
                std::size_t const xi =
                    ((b * g.c_in + ci) * g.h + static_cast<std::size_t>(iy)) * g.w +
                    static_cast<std::size_t>(ix);
                std::size_t const ki = ((co * g.c_in + ci) * g.kh + ky) * g.kw + kx;
                std::size_t const oi = ((b * g.c_out + co) * g.oh + oy) * g.ow + ox;
                f(xi, ki, oi);
              }
            }
          }
        }
      }
    }
  }
}

}  // namespace

Tensor matmul(Tensor const &a, Tensor const &b)
{
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
  {
    throw DimensionError("matmul: cannot multiply " + shape_str(a.shape()) + " by " +
                         shape_str(b.shape()));
  }
  std::size_t const m = a.dim(0);
  std::size_t const k = a.dim(1);
  std::size_t const n = b.dim(1);
  std::vector<double> out(m * n, 0.0);
  auto                av = a.values();
  auto                bv = b.values();
  for (std::size_t i = 0; i < m; ++i)
  {
    for (std::size_t t = 0; t < k; ++t)
    {
      double const aik = av[i * k + t];
      for (std::size_t j = 0; j < n; ++j)
      {
        out[i * n + j] += aik * bv[t * n + j];
      }
    }
  }
  return Tensor({m, n}, std::move(out));
}

Tensor transpose(Tensor const &a)
{
  if (a.rank() != 2)
  {
    throw DimensionError("transpose: need rank 2, got " + shape_str(a.shape()));
  }
  std::size_t const   m = a.dim(0);
  std::size_t const   n = a.dim(1);
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
  {
    for (std::size_t j = 0; j < n; ++j)
    {
      out[j * m + i] = a[i * n + j];
    }
  }
  return Tensor({n, m}, std::move(out));
}

Tensor conv2d(Tensor const &x, Tensor const &k, std::size_t stride, std::size_t padding)
{
  ConvGeometry const  g = conv_geometry(x.shape(), k.shape(), stride, padding);
  Shape               out_shape = conv_out_shape(x.shape(), g);
  std::vector<double> out(shape_size(out_shape), 0.0);
  auto                xv = x.values();
  auto                kv = k.values();
  for_each_tap(g, stride, padding,
               [&](std::size_t xi, std::size_t ki, std::size_t oi) { out[oi] += xv[xi] * kv[ki]; });
  return Tensor(std::move(out_shape), std::move(out));
}

Tensor conv2d_grad_input(Tensor const &grad_out, Tensor const &k, Shape const &x_shape,
                         std::size_t stride, std::size_t padding)
{
  ConvGeometry const  g = conv_geometry(x_shape, k.shape(), stride, padding);
  std::vector<double> gx(shape_size(x_shape), 0.0);
  auto                go = grad_out.values();
  auto                kv = k.values();
  for_each_tap(g, stride, padding,
               [&](std::size_t xi, std::size_t ki, std::size_t oi) { gx[xi] += go[oi] * kv[ki]; });
  return Tensor(x_shape, std::move(gx));
}

Tensor conv2d_grad_kernel(Tensor const &grad_out, Tensor const &x, Shape const &k_shape,
                          std::size_t stride, std::size_t padding)
{
  ConvGeometry const  g = conv_geometry(x.shape(), k_shape, stride, padding);
  std::vector<double> gk(shape_size(k_shape), 0.0);
  auto                go = grad_out.values();
  auto                xv = x.values();
  for_each_tap(g, stride, padding,
               [&](std::size_t xi, std::size_t ki, std::size_t oi) { gk[ki] += go[oi] * xv[xi]; });
  return Tensor(k_shape, std::move(gk));
}

Tensor relu(Tensor const &a)
{
  return map(a, [](double v) { return v > 0.0 ? v : 0.0; });
}

Tensor exp(Tensor const &a)
{
  return map(a, [](double v) { return std::exp(v); });
}

Tensor log(Tensor const &a)
{
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    if (!(a[i] > 0.0))
    {
      throw DomainError("log: non-positive input " + std::to_string(a[i]) + " at index " +
                        std::to_string(i));
    }
  }
  return map(a, [](double v) { return std::log(v); });
}

Tensor add(Tensor const &a, Tensor const &b)
{
  if (a.shape() == b.shape())
  {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
    {
      out[i] = a[i] + b[i];
    }
    return Tensor(a.shape(), std::move(out));
  }
  Shape const tail(a.shape().begin() + (a.rank() > 1 ? 1 : 0), a.shape().end());
  if (a.rank() < 2 || tail != b.shape())
  {
    throw DimensionError("add: cannot broadcast " + shape_str(b.shape()) + " onto " +
                         shape_str(a.shape()));
  }
  std::vector<double> out(a.size());
  std::size_t const   n = b.size();
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    out[i] = a[i] + b[i % n];
  }
  return Tensor(a.shape(), std::move(out));
}

Tensor mul(Tensor const &a, Tensor const &b)
{
  require_same_shape("mul", a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    out[i] = a[i] * b[i];
  }
  return Tensor(a.shape(), std::move(out));
}

Tensor scale(Tensor const &a, double s)
{
  return map(a, [s](double v) { return v * s; });
}

Tensor add_channel_bias(Tensor const &a, Tensor const &b)
{
  if (a.rank() < 3 || b.rank() != 1 || a.dim(a.rank() - 3) != b.dim(0))
  {
    throw DimensionError("add_channel_bias: bias " + shape_str(b.shape()) +
                         " does not match channels of " + shape_str(a.shape()));
  }
  std::size_t const   channels = b.dim(0);
  std::size_t const   plane    = a.dim(a.rank() - 2) * a.dim(a.rank() - 1);
  std::vector<double> out(a.values().begin(), a.values().end());
  for (std::size_t i = 0; i < out.size(); ++i)
  {
    out[i] += b[(i / plane) % channels];
  }
  return Tensor(a.shape(), std::move(out));
}

double sum(Tensor const &a)
{
  double s = 0.0;
  for (double v : a.values())
  {
    s += v;
  }
  return s;
}

double mean(Tensor const &a)
{
  return sum(a) / static_cast<double>(a.size());
}

namespace {

// Applies f(row_in, row_out) over the last axis of a rank-1 or rank-2 tensor.
template <typename F>
Tensor rowwise(char const *op, Tensor const &z, F &&f)
{
  if (z.rank() != 1 && z.rank() != 2)
  {
    throw DimensionError(std::string(op) + ": need rank 1 or 2, got " + shape_str(z.shape()));
  }
  std::size_t const   cols = z.dim(z.rank() - 1);
  std::size_t const   rows = z.size() / cols;
  std::vector<double> out(z.size());
  for (std::size_t r = 0; r < rows; ++r)
  {
    f(z.values().subspan(r * cols, cols), std::span<double>(out).subspan(r * cols, cols));
  }
  return Tensor(z.shape(), std::move(out));
}

}  // namespace

Tensor softmax(Tensor const &z)
{
  return rowwise("softmax", z, [](std::span<double const> in, std::span<double> out) {
    double const mx    = *std::max_element(in.begin(), in.end());
    double       total = 0.0;
    for (std::size_t i = 0; i < in.size(); ++i)
    {
      out[i] = std::exp(in[i] - mx);
      total += out[i];
    }
    for (auto &v : out)
    {
      v /= total;
    }
  });
}

Tensor log_softmax(Tensor const &z)
{
  return rowwise("log_softmax", z, [](std::span<double const> in, std::span<double> out) {
    double const mx    = *std::max_element(in.begin(), in.end());
    double       total = 0.0;
    for (double v : in)
    {
      total += std::exp(v - mx);
    }
    double const lse = mx + std::log(total);
    for (std::size_t i = 0; i < in.size(); ++i)
    {
      out[i] = in[i] - lse;
    }
  });
}

}  // namespace kernels

}  // namespace semifed
