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

#include "semifed/metrics.hpp"

#include "semifed/error.hpp"

#include <istream>
#include <ostream>

namespace semifed {

namespace {

template <typename T>
nlohmann::json optional_json(std::optional<T> const &v)
{
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <typename T>
std::optional<T> optional_field(nlohmann::json const &j, char const *key)
{
  if (!j.contains(key) || j.at(key).is_null())
  {
    return std::nullopt;
  }
  return j.at(key).get<T>();
}

}  // namespace

void to_json(nlohmann::json &j, MetricsRecord const &r)
{
  j = nlohmann::json{
      {"round", r.round},
      {"client_id", r.client_id ? nlohmann::json(*r.client_id) : nlohmann::json("server")},
      {"l_s", optional_json(r.l_s)},
      {"l_u", optional_json(r.l_u)},
      {"train_acc", optional_json(r.train_acc)},
      {"test_acc", optional_json(r.test_acc)},
      {"n_pseudo_new", r.n_pseudo_new},
      {"pseudo_precision", optional_json(r.pseudo_precision)},
      {"bytes_up", r.bytes_up},
      {"bytes_down", r.bytes_down},
  };
  if (r.warning)
  {
    j["warning"] = *r.warning;
  }
}

void from_json(nlohmann::json const &j, MetricsRecord &r)
{
  r.round = j.at("round").get<std::size_t>();
  auto const &id = j.at("client_id");
  if (id.is_string())
  {
    if (id.get<std::string>() != "server")
    {
      throw nlohmann::json::other_error::create(501, "client_id must be an integer or \"server\"", &j);
    }
    r.client_id.reset();
  }
  else
  {
    r.client_id = id.get<std::size_t>();
  }
  r.l_s              = optional_field<double>(j, "l_s");
  r.l_u              = optional_field<double>(j, "l_u");
  r.train_acc        = optional_field<double>(j, "train_acc");
  r.test_acc         = optional_field<double>(j, "test_acc");
  r.n_pseudo_new     = j.at("n_pseudo_new").get<std::size_t>();
  r.pseudo_precision = optional_field<double>(j, "pseudo_precision");
  r.bytes_up         = j.at("bytes_up").get<std::uint64_t>();
  r.bytes_down       = j.at("bytes_down").get<std::uint64_t>();
  r.warning          = optional_field<std::string>(j, "warning");
}

void write_jsonl(std::ostream &out, std::vector<MetricsRecord> const &records)
{
  for (auto const &r : records)
  {
    out << nlohmann::json(r).dump() << '\n';
  }
}

std::vector<MetricsRecord> read_jsonl(std::istream &in)
{
  std::vector<MetricsRecord> records;
  std::string                line;
  std::uint64_t              line_no = 0;
  while (std::getline(in, line))
  {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
    {
      continue;
    }
    try
    {
      records.push_back(nlohmann::json::parse(line).get<MetricsRecord>());
    }
    catch (nlohmann::json::exception const &e)
    {
      throw FormatError(std::string("malformed metrics line: ") + e.what(), line_no, "line");
    }
  }
  return records;
}

}  // namespace semifed
