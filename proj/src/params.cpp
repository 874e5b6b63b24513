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

#include "semifed/params.hpp"

#include "semifed/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace semifed {

ModelParams::ModelParams(std::vector<ParamTensor> tensors)
  : tensors_(std::move(tensors))
{
  for (auto const &t : tensors_)
  {
    if (t.values.size() != shape_size(t.shape))
    {
      throw DimensionError("parameter '" + t.name + "' of shape " + shape_str(t.shape) + " holds " +
                           std::to_string(t.values.size()) + " values");
    }
  }
}

ParamTensor const &ModelParams::find(std::string const &name) const
{
  for (auto const &t : tensors_)
  {
    if (t.name == name)
    {
      return t;
    }
  }
  throw ContractError("no parameter named '" + name + "'");
}

std::size_t ModelParams::count() const noexcept
{
  std::size_t n = 0;
  for (auto const &t : tensors_)
  {
    n += t.values.size();
  }
  return n;
}

Tensor ModelParams::as_tensor(std::size_t i) const
{
  auto const &t = tensors_.at(i);
  return Tensor(t.shape, std::vector<double>(t.values.begin(), t.values.end()));
}

bool ModelParams::same_layout(ModelParams const &other) const
{
  if (tensors_.size() != other.tensors_.size())
  {
    return false;
  }
  for (std::size_t i = 0; i < tensors_.size(); ++i)
  {
    if (tensors_[i].name != other.tensors_[i].name || tensors_[i].shape != other.tensors_[i].shape)
    {
      return false;
    }
  }
  return true;
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "wire format writer assumes a little-endian host");

class Writer
{
public:
  explicit Writer(std::vector<std::uint8_t> &out)
    : out_(out)
  {}

  void u32(std::uint32_t v)
  {
    raw(&v, sizeof v);
  }
  void raw(void const *p, std::size_t n)
  {
    auto const *b = static_cast<std::uint8_t const *>(p);
    out_.insert(out_.end(), b, b + n);
  }

private:
  std::vector<std::uint8_t> &out_;
};

class Reader
{
public:
  explicit Reader(std::span<std::uint8_t const> in)
    : in_(in)
  {}

  std::uint32_t u32()
  {
    std::uint32_t v{};
    raw(&v, sizeof v);
    return v;
  }
  void raw(void *p, std::size_t n)
  {
    if (n > in_.size() - pos_)
    {
      throw ProtocolError("model payload truncated at byte " + std::to_string(pos_));
    }
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t remaining() const
  {
    return in_.size() - pos_;
  }

private:
  std::span<std::uint8_t const> in_;
  std::size_t                   pos_{0};
};

}  // namespace

std::size_t serialized_size(ModelParams const &params)
{
  std::size_t n = 4;
  for (auto const &t : params.tensors())
  {
    n += 4 + t.name.size() + 4 + 4 * t.shape.size() + 4 * t.values.size();
  }
  return n;
}

std::vector<std::uint8_t> serialize(ModelParams const &params)
{
  std::vector<std::uint8_t> out;
  out.reserve(serialized_size(params));
  Writer w(out);
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (auto const &t : params.tensors())
  {
    w.u32(static_cast<std::uint32_t>(t.name.size()));
    w.raw(t.name.data(), t.name.size());
    w.u32(static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape)
    {
      w.u32(static_cast<std::uint32_t>(d));
    }
    w.raw(t.values.data(), t.values.size() * sizeof(float));
  }
  return out;
}

ModelParams deserialize(std::span<std::uint8_t const> bytes)
{
  Reader                   r(bytes);
  std::uint32_t const      count = r.u32();
  std::vector<ParamTensor> tensors;
  for (std::uint32_t i = 0; i < count; ++i)
  {
    ParamTensor         t;
    std::uint32_t const name_len = r.u32();
    if (name_len > r.remaining())
    {
      throw ProtocolError("model payload: name length exceeds payload");
    }
    t.name.resize(name_len);
    r.raw(t.name.data(), name_len);
    std::uint32_t const rank = r.u32();
    if (rank == 0 || rank > 8)
    {
      throw ProtocolError("model payload: tensor '" + t.name + "' has invalid rank " +
                          std::to_string(rank));
    }
    std::size_t n = 1;
    for (std::uint32_t k = 0; k < rank; ++k)
    {
      std::uint32_t const d = r.u32();
      if (d == 0)
      {
        throw ProtocolError("model payload: tensor '" + t.name + "' has a zero dimension");
      }
      t.shape.push_back(d);
      n *= d;
    }
    if (n > r.remaining() / sizeof(float))
    {
      throw ProtocolError("model payload truncated inside tensor '" + t.name + "'");
    }
    t.values.resize(n);
    r.raw(t.values.data(), n * sizeof(float));
    tensors.push_back(std::move(t));
  }
  if (r.remaining() != 0)
  {
    throw ProtocolError("model payload has " + std::to_string(r.remaining()) + " trailing bytes");
  }
  return ModelParams(std::move(tensors));
}

void save_checkpoint(ModelParams const &params, std::string const &path)
{
  auto          bytes = serialize(params);
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw Error("cannot open checkpoint for writing: " + path);
  }
  out.write(reinterpret_cast<char const *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

ModelParams load_checkpoint(std::string const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw Error("cannot open checkpoint: " + path);
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace semifed
