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
#include "semifed/flcore.hpp"
#include "semifed/model.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace semifed {

enum class Method
{
  Supervised,
  ConsistencyOnly,
  SemiFed,
};

std::string to_string(Method m);
Method      parse_method(std::string const &s);

struct DataConfig
{
  std::string source{"synthetic"};  // synthetic | sfds
  std::string path;
  std::string test_path;
  std::size_t n{4000};
  std::size_t test_n{1000};
  std::size_t classes{4};
  std::size_t dim{2};
  double      separation{3.0};
  std::size_t holdout{0};  // > 0: evaluate on a validation split carved from training data
};

/**
 * Everything one experiment depends on. Each field is reachable through a dotted key
 * (see config_keys()); the defaults are the full-scale recipe with 10 clients, 300
 * rounds and 10 local epochs.
 */
struct ExperimentConfig
{
  DataConfig    data;
  PartitionSpec partition;
  ModelKind     model_kind{ModelKind::Mlp};
  std::vector<std::size_t> model_hidden{32};
  std::vector<std::size_t> model_channels{8, 16};
  RoundPlan     plan;
  std::optional<double> gamma_all;  // plan.gamma given as one value for every pseudo round
  std::string   lr_schedule{"constant"};
  Method        method{Method::SemiFed};
  std::uint64_t seed{0};
  std::string   output_dir;

  /// Every problem that prevents running; empty when runnable.
  std::vector<std::string> validate() const;

  /// The plan after method constraints: supervised zeroes lambda_u and clears the pseudo
  /// rounds; consistency-only clears the pseudo rounds.
  RoundPlan effective_plan() const;

  ClassifierSpec classifier(Shape const &input_shape, std::size_t num_classes) const;
};

ExperimentConfig default_config();

/// Named starting points: "cifar10", "svhn", "desk-blobs".
ExperimentConfig preset(std::string const &name);

/// Sets one dotted key. Throws ConfigError for unknown keys or unparsable values.
void set_key(ExperimentConfig &config, std::string const &key, std::string const &value);

/// Current value of a dotted key, formatted as set_key() accepts it.
std::string get_key(ExperimentConfig const &config, std::string const &key);

std::vector<std::string> const &config_keys();

/// Parses "key = value" lines; '#' starts a comment. Keys keep file order.
std::vector<std::pair<std::string, std::string>> parse_config_text(std::string const &text);

/**
 * Builds a config from a file's contents and overrides (applied in order after the file).
 * A "preset" key, if present anywhere, is applied first. All bad keys and values are
 * collected and reported together in one ConfigError.
 */
ExperimentConfig load_config(std::string const &text,
                             std::vector<std::pair<std::string, std::string>> const &overrides = {});

/// key = value lines for every key, loadable by load_config().
std::string dump_config(ExperimentConfig const &config);

}  // namespace semifed
