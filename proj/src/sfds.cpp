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

#include "semifed/sfds.hpp"

#include "semifed/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace semifed {

namespace {

std::vector<std::uint8_t> read_file(std::string const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw Error("cannot open " + path);
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

template <typename T>
T read_le(std::span<std::uint8_t const> bytes, std::size_t offset)
{
  T v{};
  for (std::size_t i = 0; i < sizeof(T); ++i)
  {
    v = static_cast<T>(v | (static_cast<T>(bytes[offset + i]) << (8 * i)));
  }
  return v;
}

template <typename T>
void write_le(std::vector<std::uint8_t> &out, T v)
{
  auto u = static_cast<std::make_unsigned_t<T>>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i)
  {
    out.push_back(static_cast<std::uint8_t>((u >> (8 * i)) & 0xFFU));
  }
}

float pixel_to_float(std::uint8_t p)
{
  return static_cast<float>(p) / 255.0F;
}

std::uint8_t float_to_pixel(float v)
{
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0F, 1.0F) * 255.0F));
}

SfdsHeader parse_header(std::span<std::uint8_t const> bytes)
{
  if (bytes.size() < kSfdsHeaderSize)
  {
    throw FormatError("SFDS header truncated", bytes.size());
  }
  if (std::memcmp(bytes.data(), "SFDS", 4) != 0)
  {
    throw FormatError("bad SFDS magic", 0);
  }
  auto const version = read_le<std::uint32_t>(bytes, 4);
  if (version != kSfdsVersion)
  {
    throw FormatError("unsupported SFDS version " + std::to_string(version), 4);
  }
  auto const c = read_le<std::uint16_t>(bytes, 12);
  auto const h = read_le<std::uint16_t>(bytes, 14);
  auto const w = read_le<std::uint16_t>(bytes, 16);
  if (c == 0 || h == 0 || w == 0)
  {
    throw FormatError("SFDS sample shape has a zero axis", 12);
  }
  return {read_le<std::uint32_t>(bytes, 8), {c, h, w}, read_le<std::uint16_t>(bytes, 18)};
}

}  // namespace

SfdsHeader inspect_dataset(std::string const &path)
{
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in)
  {
    throw Error("cannot open " + path);
  }
  auto const size = static_cast<std::uint64_t>(in.tellg());
  in.seekg(0);
  std::vector<std::uint8_t> head(kSfdsHeaderSize);
  in.read(reinterpret_cast<char *>(head.data()), static_cast<std::streamsize>(std::min<std::uint64_t>(size, kSfdsHeaderSize)));
  head.resize(static_cast<std::size_t>(std::min<std::uint64_t>(size, kSfdsHeaderSize)));
  SfdsHeader const  header = parse_header(head);
  std::uint64_t const expected =
      kSfdsHeaderSize + std::uint64_t{header.count} * (4 + shape_size(header.sample_shape));
  if (size != expected)
  {
    throw FormatError("SFDS file is " + std::to_string(size) + " bytes, header implies " +
                          std::to_string(expected),
                      std::min(size, expected));
  }
  return header;
}

Dataset decode_sfds(std::span<std::uint8_t const> bytes)
{
  SfdsHeader const header  = parse_header(bytes);
  auto const       n       = header.count;
  auto const       classes = header.num_classes;

  Dataset data;
  data.sample_shape = header.sample_shape;
  data.num_classes  = classes;
  std::size_t const pixels = shape_size(header.sample_shape);
  std::size_t const record = 4 + pixels;
  data.examples.reserve(std::min<std::size_t>(n, (bytes.size() - kSfdsHeaderSize) / record + 1));

  std::size_t offset = kSfdsHeaderSize;
  for (std::uint32_t i = 0; i < n; ++i)
  {
    if (bytes.size() - offset < record)
    {
      throw FormatError("SFDS record " + std::to_string(i) + " truncated", offset);
    }
    auto const label = static_cast<std::int32_t>(read_le<std::uint32_t>(bytes, offset));
    if (label < kUnlabeled || (label >= 0 && static_cast<std::uint32_t>(label) >= classes))
    {
      throw FormatError("SFDS record " + std::to_string(i) + " has label " + std::to_string(label) +
                            " outside [0," + std::to_string(classes) + ")",
                        offset);
    }
    Example e;
    e.id    = i;
    e.label = label;
    e.features.resize(pixels);
    auto const *px = bytes.data() + offset + 4;
    std::transform(px, px + pixels, e.features.begin(), pixel_to_float);
    data.examples.push_back(std::move(e));
    offset += record;
  }
  if (offset != bytes.size())
  {
    throw FormatError("SFDS file has trailing bytes", offset);
  }
  return data;
}

std::vector<std::uint8_t> encode_sfds(Dataset const &data)
{
  Shape shape = data.sample_shape;
  if (shape.size() == 1)
  {
    shape = {1, 1, shape[0]};
  }
  if (shape.size() != 3)
  {
    throw FormatError("SFDS stores [C,H,W] samples, got " + shape_str(data.sample_shape), 0);
  }
  constexpr auto kMax16 = std::numeric_limits<std::uint16_t>::max();
  if (shape[0] > kMax16 || shape[1] > kMax16 || shape[2] > kMax16 || data.num_classes > kMax16 ||
      data.size() > std::numeric_limits<std::uint32_t>::max())
  {
    throw FormatError("dataset does not fit SFDS header fields", 0);
  }
  std::size_t const         pixels = shape_size(shape);
  std::vector<std::uint8_t> out{'S', 'F', 'D', 'S'};
  out.reserve(kSfdsHeaderSize + data.size() * (4 + pixels));
  write_le<std::uint32_t>(out, kSfdsVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(data.size()));
  write_le<std::uint16_t>(out, static_cast<std::uint16_t>(shape[0]));
  write_le<std::uint16_t>(out, static_cast<std::uint16_t>(shape[1]));
  write_le<std::uint16_t>(out, static_cast<std::uint16_t>(shape[2]));
  write_le<std::uint16_t>(out, static_cast<std::uint16_t>(data.num_classes));
  for (auto const &e : data.examples)
  {
    if (e.features.size() != pixels)
    {
      throw FormatError("example " + std::to_string(e.id) + " does not match the sample shape", out.size());
    }
    write_le<std::int32_t>(out, e.label);
    std::transform(e.features.begin(), e.features.end(), std::back_inserter(out), float_to_pixel);
  }
  return out;
}

Dataset load_dataset(std::string const &path)
{
  auto bytes = read_file(path);
  return decode_sfds(bytes);
}

void save_dataset(Dataset const &data, std::string const &path)
{
  auto          bytes = encode_sfds(data);
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw Error("cannot open " + path + " for writing");
  }
  out.write(reinterpret_cast<char const *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Dataset load_cifar10_batches(std::vector<std::string> const &paths)
{
  constexpr std::size_t kPixels = 3 * 32 * 32;
  constexpr std::size_t kRecord = 1 + kPixels;
  Dataset               data;
  data.sample_shape = {3, 32, 32};
  data.num_classes  = 10;
  for (auto const &path : paths)
  {
    auto const bytes = read_file(path);
    if (bytes.size() % kRecord != 0)
    {
      throw FormatError(path + ": size is not a multiple of the CIFAR-10 record size",
                        bytes.size() - bytes.size() % kRecord);
    }
    for (std::size_t off = 0; off < bytes.size(); off += kRecord)
    {
      if (bytes[off] >= 10)
      {
        throw FormatError(path + ": label " + std::to_string(bytes[off]) + " out of range", off);
      }
      Example e;
      e.id    = data.examples.size();
      e.label = bytes[off];
      e.features.resize(kPixels);
      std::transform(bytes.begin() + static_cast<std::ptrdiff_t>(off + 1),
                     bytes.begin() + static_cast<std::ptrdiff_t>(off + kRecord), e.features.begin(),
                     pixel_to_float);
      data.examples.push_back(std::move(e));
    }
  }
  return data;
}

}  // namespace semifed
