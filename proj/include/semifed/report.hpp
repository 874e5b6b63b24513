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

#include "semifed/metrics.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace semifed {

/**
 * Tidy CSV with header "round,series,value". Each server record of round >= 1 adds one row
 * per non-null field among test_acc, l_s, l_u, train_acc, n_pseudo_new and pseudo_precision,
 * under series "<name>/<field>". Client records are ignored; the server record already
 * aggregates them.
 */
void export_plot_data(std::ostream &out,
                      std::vector<std::pair<std::string, std::vector<MetricsRecord>>> const &runs);

}  // namespace semifed
