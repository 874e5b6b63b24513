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

#include "semifed/data.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace semifed {

// SFDS dataset container, little-endian:
//
//   "SFDS"            4 bytes magic
//   version     u32   = 1
//   N           u32   record count
//   channels    u16
//   height      u16
//   width       u16
//   num_classes u16
//   N records of: label i32 (-1 = unlabeled), pixels u8[channels*height*width]
//
// Pixels load as value/255. Writing quantizes features to round(clamp(v,0,1)*255), so
// datasets read from SFDS or CIFAR round-trip exactly. Example ids are record indices.

inline constexpr std::uint32_t kSfdsVersion    = 1;
inline constexpr std::size_t   kSfdsHeaderSize = 20;

struct SfdsHeader
{
  std::uint32_t count{0};
  Shape         sample_shape;
  std::size_t   num_classes{0};
};

/// Validates the header of an SFDS file and that its size matches the record count, without
/// reading any record.
SfdsHeader inspect_dataset(std::string const &path);

/// Parses an SFDS image. Throws FormatError with the byte offset of the first fault.
Dataset decode_sfds(std::span<std::uint8_t const> bytes);

std::vector<std::uint8_t> encode_sfds(Dataset const &data);

Dataset load_dataset(std::string const &path);
void    save_dataset(Dataset const &data, std::string const &path);

/// Reads CIFAR-10 binary batch files (records of 1 label byte + 3072 pixel bytes) into one
/// 3x32x32, 10-class dataset.
Dataset load_cifar10_batches(std::vector<std::string> const &paths);

}  // namespace semifed
