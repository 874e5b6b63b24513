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

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace semifed {

/// Observables for one (round, client) or, with client_id empty, for the server.
struct MetricsRecord
{
  std::size_t                round{0};
  std::optional<std::size_t> client_id;  // empty = "server"
  std::optional<double>      l_s;
  std::optional<double>      l_u;
  std::optional<double>      train_acc;
  std::optional<double>      test_acc;
  std::size_t                n_pseudo_new{0};
  std::optional<double>      pseudo_precision;
  std::uint64_t              bytes_up{0};
  std::uint64_t              bytes_down{0};
  std::optional<std::string> warning;

  bool is_server() const noexcept
  {
    return !client_id.has_value();
  }

  bool operator==(MetricsRecord const &) const = default;
};

void to_json(nlohmann::json &j, MetricsRecord const &r);
void from_json(nlohmann::json const &j, MetricsRecord &r);

/// One JSON object per line.
void                       write_jsonl(std::ostream &out, std::vector<MetricsRecord> const &records);
std::vector<MetricsRecord> read_jsonl(std::istream &in);

}  // namespace semifed
