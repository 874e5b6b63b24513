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

#include "semifed/experiment.hpp"

#include "semifed/error.hpp"
#include "semifed/flcore.hpp"
#include "semifed/rng.hpp"
#include "semifed/sfds.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace semifed {

namespace {

constexpr std::uint64_t kTrainStream     = 0x7a1;
constexpr std::uint64_t kTestStream      = 0x7e57;
constexpr std::uint64_t kHoldoutStream   = 0x401d;
constexpr std::uint64_t kPartitionStream = 0xda7a;
constexpr std::uint64_t kInitStream      = 0x1417;
constexpr std::size_t   kEvalChunk       = 256;

std::string join_problems(std::vector<std::string> const &problems)
{
  std::string msg = "invalid configuration:";
  for (auto const &p : problems)
  {
    msg += "\n  - " + p;
  }
  return msg;
}

std::size_t argmax_row(Tensor const &probs, std::size_t row)
{
  std::size_t const C    = probs.dim(1);
  std::size_t       best = 0;
  for (std::size_t c = 1; c < C; ++c)
  {
    if (probs.at(row, c) > probs.at(row, best))
    {
      best = c;
    }
  }
  return best;
}

}  // namespace

double evaluate(ClassifierSpec const &spec, ModelParams const &params, Dataset const &test)
{
  if (test.examples.empty())
  {
    throw ContractError("evaluate: empty test set");
  }
  std::size_t correct = 0;
  for (std::size_t start = 0; start < test.size(); start += kEvalChunk)
  {
    std::size_t const                     end = std::min(test.size(), start + kEvalChunk);
    std::vector<std::vector<float> const *> samples;
    for (std::size_t i = start; i < end; ++i)
    {
      if (test.examples[i].label < 0)
      {
        throw ContractError("evaluate: test example " + std::to_string(test.examples[i].id) + " has no label");
      }
      samples.push_back(&test.examples[i].features);
    }
    Tensor const probs = predict_batch(spec, params, make_batch(spec, samples));
    for (std::size_t i = start; i < end; ++i)
    {
      if (static_cast<int>(argmax_row(probs, i - start)) == test.examples[i].label)
      {
        ++correct;
      }
    }
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

ExperimentData load_experiment_data(ExperimentConfig const &config)
{
  ExperimentData d;
  auto const    &dc = config.data;
  if (dc.source == "synthetic")
  {
    d.train = make_synthetic_blobs(dc.n, dc.classes, dc.dim, dc.separation,
                                   derive_seed(config.seed, kTrainStream));
    d.test  = make_synthetic_blobs(dc.test_n, dc.classes, dc.dim, dc.separation,
                                   derive_seed(config.seed, kTestStream), dc.n);
  }
  else
  {
    d.train = load_dataset(dc.path);
    if (!dc.test_path.empty())
    {
      d.test = load_dataset(dc.test_path);
    }
  }
  if (dc.holdout > 0)
  {
    d.test = take_holdout(d.train, dc.holdout, derive_seed(config.seed, kHoldoutStream));
  }
  return d;
}

ExperimentResult run_experiment(ExperimentConfig const &config, RunOptions const &options)
{
  if (auto problems = config.validate(); !problems.empty())
  {
    throw ConfigError(join_problems(problems));
  }
  RoundPlan const plan = config.effective_plan();
  ExperimentData  data = load_experiment_data(config);

  ClassifierSpec spec;
  Partition      part;
  try
  {
    spec = config.classifier(data.train.sample_shape, data.train.num_classes);
    spec.validate();
    PartitionSpec ps = config.partition;
    ps.seed          = derive_seed(config.seed, kPartitionStream);
    part             = partition(data.train, ps);
  }
  catch (SpecError const &e)
  {
    throw ConfigError(join_problems({e.what()}));
  }

  std::filesystem::path const out_dir = config.output_dir;
  if (!config.output_dir.empty())
  {
    std::filesystem::create_directories(out_dir);
    std::ofstream(out_dir / "config.txt") << dump_config(config);
  }

  ServerState server;
  server.global = init_model(spec, derive_seed(config.seed, kInitStream));

  std::vector<ClientState> clients;
  for (auto &cd : part.clients)
  {
    ClientState c;
    c.seed_key = cd.client_id;
    c.data     = std::move(cd);
    c.params   = transmit(server.global);
    clients.push_back(std::move(c));
  }

  ExperimentResult result;
  result.warnings = part.warnings;

  MetricsRecord initial;
  initial.round    = 0;
  initial.test_acc = evaluate(spec, server.global, data.test);
  if (!part.warnings.empty())
  {
    std::string w;
    for (auto const &s : part.warnings)
    {
      w += (w.empty() ? "" : "; ") + s;
    }
    initial.warning = w;
  }
  result.records.push_back(initial);

  RoundContext ctx;
  ctx.spec    = spec;
  ctx.plan    = plan;
  ctx.seed    = config.seed;
  ctx.order   = options.order;
  ctx.threads = options.threads == 0 ? default_thread_count() : options.threads;
  ctx.hidden  = &part.hidden;

  for (std::size_t t = 0; t < plan.rounds; ++t)
  {
    auto records            = run_round(server, clients, ctx);
    records.back().test_acc = evaluate(spec, server.global, data.test);
    for (auto const &r : records)
    {
      if (r.warning && std::find(result.warnings.begin(), result.warnings.end(), *r.warning) == result.warnings.end())
      {
        result.warnings.push_back(*r.warning);
      }
    }
    result.records.insert(result.records.end(), records.begin(), records.end());
    if (plan.is_pseudo_round(t) && !config.output_dir.empty())
    {
      save_checkpoint(server.global,
                      (out_dir / ("checkpoint_round_" + std::to_string(server.round) + ".bin")).string());
    }
  }

  result.final_global   = server.global;
  result.final_accuracy = result.records.back().test_acc;
  if (!config.output_dir.empty())
  {
    save_checkpoint(server.global, (out_dir / "checkpoint_final.bin").string());
    std::ofstream metrics(out_dir / "metrics.jsonl");
    write_jsonl(metrics, result.records);
    if (!metrics)
    {
      throw Error("could not write " + (out_dir / "metrics.jsonl").string());
    }
  }
  return result;
}

std::vector<std::pair<std::string, std::string>> const &sweep_knobs()
{
  static std::vector<std::pair<std::string, std::string>> const knobs{
      {"lambda_u", "plan.lambda_u"}, {"l2", "plan.l2"},        {"lr", "plan.lr"},
      {"gamma", "plan.gamma"},       {"u", "plan.agreement"}, {"cap", "plan.cap"},
  };
  return knobs;
}

std::vector<SweepRow> sweep(ExperimentConfig const &config, std::string const &knob,
                            std::vector<std::string> const &values, std::vector<std::uint64_t> const &seeds,
                            RunOptions const &options)
{
  auto const &knobs = sweep_knobs();
  auto        it    = std::find_if(knobs.begin(), knobs.end(), [&](auto const &k) { return k.first == knob; });
  if (it == knobs.end())
  {
    std::string names;
    for (auto const &k : knobs)
    {
      names += (names.empty() ? "" : ", ") + k.first;
    }
    throw ConfigError("unknown sweep knob '" + knob + "' (expected one of " + names + ")");
  }
  if (values.empty() || seeds.empty())
  {
    throw ConfigError("sweep needs at least one value and one seed");
  }

  std::vector<ExperimentConfig> configs;
  std::vector<std::string>      problems;
  for (auto const &v : values)
  {
    ExperimentConfig c = config;
    try
    {
      set_key(c, it->second, v);
    }
    catch (Error const &e)
    {
      problems.emplace_back(e.what());
      continue;
    }
    for (auto &p : c.validate())
    {
      problems.push_back(knob + "=" + v + ": " + p);
    }
    configs.push_back(std::move(c));
  }
  if (!problems.empty())
  {
    throw ConfigError(join_problems(problems));
  }

  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < values.size(); ++i)
  {
    SweepRow row;
    row.value = values[i];
    for (auto seed : seeds)
    {
      ExperimentConfig c = configs[i];
      c.seed             = seed;
      if (!config.output_dir.empty())
      {
        c.output_dir = (std::filesystem::path(config.output_dir) /
                        (knob + "_" + values[i]) / ("seed_" + std::to_string(seed)))
                           .string();
      }
      row.accuracies.push_back(run_experiment(c, options).final_accuracy.value_or(0.0));
    }
    double total = 0.0;
    for (double a : row.accuracies)
    {
      total += a;
    }
    row.mean = total / static_cast<double>(row.accuracies.size());
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_sweep(std::string const &knob, std::vector<SweepRow> const &rows,
                         std::vector<std::uint64_t> const &seeds)
{
  std::ostringstream out;
  out << std::left << std::setw(12) << knob << std::setw(10) << "mean";
  for (auto s : seeds)
  {
    out << std::setw(10) << ("seed " + std::to_string(s));
  }
  out << '\n' << std::fixed << std::setprecision(4);
  for (auto const &r : rows)
  {
    out << std::setw(12) << r.value << std::setw(10) << r.mean;
    for (double a : r.accuracies)
    {
      out << std::setw(10) << a;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace semifed
