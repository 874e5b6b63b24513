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

#include "semifed/report.hpp"

#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

namespace semifed {

namespace {

std::string csv_field(std::string const &s)
{
  if (s.find_first_of(",\"\n") == std::string::npos)
  {
    return s;
  }
  std::string out = "\"";
  for (char c : s)
  {
    out += c;
    if (c == '"')
    {
      out += '"';
    }
  }
  return out + "\"";
}

void row(std::ostream &out, std::size_t round, std::string const &series, std::optional<double> v)
{
  if (!v)
  {
    return;
  }
  std::ostringstream num;
  num << std::setprecision(17) << *v;
  out << round << ',' << csv_field(series) << ',' << num.str() << '\n';
}

}  // namespace

void export_plot_data(std::ostream &out,
                      std::vector<std::pair<std::string, std::vector<MetricsRecord>>> const &runs)
{
  out << "round,series,value\n";
  for (auto const &[name, records] : runs)
  {
    for (auto const &r : records)
    {
      if (!r.is_server() || r.round == 0)
      {
        continue;
      }
      row(out, r.round, name + "/test_acc", r.test_acc);
      row(out, r.round, name + "/l_s", r.l_s);
      row(out, r.round, name + "/l_u", r.l_u);
      row(out, r.round, name + "/train_acc", r.train_acc);
      row(out, r.round, name + "/n_pseudo_new", static_cast<double>(r.n_pseudo_new));
      row(out, r.round, name + "/pseudo_precision", r.pseudo_precision);
    }
  }
}

}  // namespace semifed
