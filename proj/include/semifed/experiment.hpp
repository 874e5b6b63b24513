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

#include "semifed/config.hpp"
#include "semifed/data.hpp"
#include "semifed/metrics.hpp"
#include "semifed/model.hpp"
#include "semifed/params.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace semifed {

/// Fraction of test examples whose argmax prediction equals the label.
/// Throws ContractError on an empty or unlabeled test set.
double evaluate(ClassifierSpec const &spec, ModelParams const &params, Dataset const &test);

struct ExperimentData
{
  Dataset train;
  Dataset test;
};

/// Loads or generates the train/test data a config asks for.
ExperimentData load_experiment_data(ExperimentConfig const &config);

struct ExperimentResult
{
  std::vector<MetricsRecord> records;  // round 0 evaluation first
  ModelParams                final_global;
  std::optional<double>      final_accuracy;
  std::vector<std::string>   warnings;
};

struct RunOptions
{
  ExecutionOrder order{ExecutionOrder::Parallel};
  std::size_t    threads{0};  // 0 = default_thread_count()
};

/**
 * Runs T rounds from config. Throws ConfigError listing every problem before doing any work.
 * When config.output_dir is set, writes metrics.jsonl, config.txt, checkpoint_round_<t>.bin
 * after each pseudo round and checkpoint_final.bin there.
 */
ExperimentResult run_experiment(ExperimentConfig const &config, RunOptions const &options = {});

/// Knobs sweep() accepts, with the config key each one sets.
std::vector<std::pair<std::string, std::string>> const &sweep_knobs();

struct SweepRow
{
  std::string         value;
  std::vector<double> accuracies;  // one per seed
  double              mean{0.0};
};

/// One run per (value, seed); unknown knobs throw ConfigError naming the valid ones.
std::vector<SweepRow> sweep(ExperimentConfig const &config, std::string const &knob,
                            std::vector<std::string> const &values, std::vector<std::uint64_t> const &seeds,
                            RunOptions const &options = {});

/// Plain-text table: value, mean accuracy, then one column per seed.
std::string format_sweep(std::string const &knob, std::vector<SweepRow> const &rows,
                         std::vector<std::uint64_t> const &seeds);

}  // namespace semifed
