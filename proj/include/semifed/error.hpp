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

#include <cstdint>
#include <stdexcept>
#include <string>

namespace semifed {

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Shapes that do not conform for an operation.
class DimensionError : public Error
{
public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation (e.g. log of a non-positive value).
class DomainError : public Error
{
public:
  using Error::Error;
};

/// Caller broke an API precondition.
class ContractError : public Error
{
public:
  using Error::Error;
};

/// Invalid model, partition or split specification.
class SpecError : public Error
{
public:
  using Error::Error;
};

class LabelError : public Error
{
public:
  using Error::Error;
};

/// Wire payload failed to decode or did not round-trip.
class ProtocolError : public Error
{
public:
  using Error::Error;
};

class ConfigError : public Error
{
public:
  using Error::Error;
};

/// Malformed dataset or metrics file. Carries the byte offset (or line number) of the fault.
class FormatError : public Error
{
public:
  FormatError(std::string const &what, std::uint64_t offset, char const *unit = "offset")
    : Error(what + " (at " + unit + " " + std::to_string(offset) + ")")
    , offset_(offset)
  {}

  std::uint64_t offset() const noexcept
  {
    return offset_;
  }

private:
  std::uint64_t offset_;
};

}  // namespace semifed
