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

#include "semifed/config.hpp"
#include "semifed/error.hpp"
#include "semifed/experiment.hpp"
#include "semifed/report.hpp"
#include "semifed/rng.hpp"
#include "semifed/sfds.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace semifed;

namespace {

constexpr int kExitOk         = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime    = 2;

std::string read_text(std::string const &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw ConfigError("cannot open config file " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// "--plan.lr=0.1" or "--plan.lr 0.1"
std::vector<std::pair<std::string, std::string>> parse_overrides(std::vector<std::string> const &args)
{
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < args.size(); ++i)
  {
    std::string a = args[i];
    if (a.rfind("--", 0) != 0)
    {
      throw ConfigError("unexpected argument '" + a + "'");
    }
    a = a.substr(2);
    if (auto eq = a.find('='); eq != std::string::npos)
    {
      out.emplace_back(a.substr(0, eq), a.substr(eq + 1));
    }
    else if (i + 1 < args.size())
    {
      out.emplace_back(a, args[++i]);
    }
    else
    {
      throw ConfigError("option --" + a + " needs a value");
    }
  }
  return out;
}

ExperimentConfig build_config(std::string const &path, std::vector<std::string> const &extras)
{
  return load_config(path.empty() ? std::string{} : read_text(path), parse_overrides(extras));
}

template <typename T>
std::vector<T> split_list(std::string const &s, T (*conv)(std::string const &))
{
  std::vector<T>     out;
  std::string        item;
  std::istringstream in(s);
  while (std::getline(in, item, ','))
  {
    if (!item.empty())
    {
      out.push_back(conv(item));
    }
  }
  return out;
}

std::string as_string(std::string const &s)
{
  return s;
}

std::uint64_t as_u64(std::string const &s)
{
  try
  {
    return std::stoull(s);
  }
  catch (std::exception const &)
  {
    throw ConfigError("expected an integer seed, got '" + s + "'");
  }
}

int cmd_convert(std::vector<std::string> const &cifar, std::string const &out)
{
  Dataset const d = load_cifar10_batches(cifar);
  save_dataset(d, out);
  std::cout << "wrote " << d.size() << " examples to " << out << '\n';
  return kExitOk;
}

int cmd_partition(std::string const &data_path, std::string const &out_dir, PartitionSpec const &spec)
{
  Dataset const   data = load_dataset(data_path);
  Partition const part = partition(data, spec);
  fs::create_directories(out_dir);

  nlohmann::json summary;
  summary["clients"] = nlohmann::json::array();
  for (auto const &c : part.clients)
  {
    Dataset d;
    d.sample_shape = data.sample_shape;
    d.num_classes  = data.num_classes;
    d.examples     = c.labeled;
    d.examples.insert(d.examples.end(), c.unlabeled.begin(), c.unlabeled.end());
    save_dataset(d, (fs::path(out_dir) / ("client_" + std::to_string(c.client_id) + ".sfds")).string());

    Dataset labeled{data.sample_shape, data.num_classes, c.labeled};
    std::vector<std::size_t> hidden_counts(data.num_classes, 0);
    for (auto const &e : c.unlabeled)
    {
      if (auto l = part.hidden.label_of(e.id))
      {
        ++hidden_counts[static_cast<std::size_t>(*l)];
      }
    }
    summary["clients"].push_back({{"client_id", c.client_id},
                                  {"labeled", c.labeled.size()},
                                  {"unlabeled", c.unlabeled.size()},
                                  {"labeled_per_class", labeled.class_counts()},
                                  {"unlabeled_per_class", hidden_counts}});
  }
  summary["warnings"] = part.warnings;
  std::ofstream(fs::path(out_dir) / "summary.json") << summary.dump(2) << '\n';
  for (auto const &w : part.warnings)
  {
    std::cerr << "warning: " << w << '\n';
  }
  std::cout << "wrote " << part.clients.size() << " client files to " << out_dir << '\n';
  return kExitOk;
}

int cmd_run(ExperimentConfig const &config, RunOptions const &opts)
{
  ExperimentResult const r = run_experiment(config, opts);
  for (auto const &w : r.warnings)
  {
    std::cerr << "warning: " << w << '\n';
  }
  std::cout << "rounds " << config.plan.rounds << "  final test accuracy " << r.final_accuracy.value_or(0.0)
            << '\n';
  if (!config.output_dir.empty())
  {
    std::cout << "outputs in " << config.output_dir << '\n';
  }
  return kExitOk;
}

int cmd_report(std::vector<std::string> const &inputs, std::string const &out)
{
  std::vector<std::pair<std::string, std::vector<MetricsRecord>>> runs;
  for (auto const &spec : inputs)
  {
    std::string name;
    std::string path = spec;
    if (auto eq = spec.find('='); eq != std::string::npos)
    {
      name = spec.substr(0, eq);
      path = spec.substr(eq + 1);
    }
    else
    {
      name = fs::path(spec).parent_path().filename().string();
      if (name.empty())
      {
        name = fs::path(spec).stem().string();
      }
    }
    std::ifstream in(path);
    if (!in)
    {
      throw Error("cannot open metrics file " + path);
    }
    try
    {
      runs.emplace_back(name, read_jsonl(in));
    }
    catch (FormatError const &e)
    {
      throw FormatError(path + ": " + e.what(), e.offset(), "line");
    }
  }
  if (out.empty() || out == "-")
  {
    export_plot_data(std::cout, runs);
  }
  else
  {
    std::ofstream f(out);
    export_plot_data(f, runs);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"SemiFed: semi-supervised federated learning simulator"};
  app.require_subcommand(1);

  std::vector<std::string> cifar;
  std::string              convert_out;
  auto *convert = app.add_subcommand("convert", "Convert CIFAR-10 binary batches to SFDS");
  convert->add_option("--cifar", cifar, "CIFAR-10 batch files")->required()->check(CLI::ExistingFile);
  convert->add_option("--out", convert_out, "Output SFDS file")->required();

  std::string   part_data, part_out, part_mode = "dirichlet";
  PartitionSpec pspec;
  auto *part = app.add_subcommand("partition", "Write per-client SFDS files and a distribution summary");
  part->add_option("--data", part_data, "Input SFDS file")->required()->check(CLI::ExistingFile);
  part->add_option("--out", part_out, "Output directory")->required();
  part->add_option("--mode", part_mode, "iid or dirichlet");
  part->add_option("--alpha", pspec.alpha, "Dirichlet concentration");
  part->add_option("--clients", pspec.clients, "Number of clients");
  part->add_option("--n-labeled", pspec.n_labeled_total, "Labeled examples in total");
  part->add_option("--seed", pspec.seed, "Seed");
  part->add_flag("--independent-draws", pspec.independent_draws, "Separate draws for labeled and unlabeled pools");

  std::string run_config;
  std::size_t threads = 0;
  auto *run = app.add_subcommand("run", "Run one experiment; --<key>=<value> overrides config keys");
  run->add_option("--config", run_config, "Config file")->check(CLI::ExistingFile);
  run->add_option("--threads", threads, "Worker threads (default: all, capped by SEMIFED_THREADS)");
  run->allow_extras();

  std::string sweep_config, knob, values, seeds = "0";
  auto *sw = app.add_subcommand("sweep", "Run one experiment per knob value and seed");
  sw->add_option("--config", sweep_config, "Config file")->check(CLI::ExistingFile);
  sw->add_option("--knob", knob, "lambda_u, l2, lr, gamma, u or cap")->required();
  sw->add_option("--values", values, "Comma-separated values")->required();
  sw->add_option("--seeds", seeds, "Comma-separated seeds");
  sw->add_option("--threads", threads, "Worker threads");
  sw->allow_extras();

  std::vector<std::string> metrics;
  std::string              report_out;
  auto *report = app.add_subcommand("report", "Export metrics as round,series,value CSV");
  report->add_option("--metrics", metrics, "metrics.jsonl files, optionally name=path")->required();
  report->add_option("--out", report_out, "Output CSV (default stdout)");

  try
  {
    app.parse(argc, argv);
  }
  catch (CLI::ParseError const &e)
  {
    int const code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try
  {
    RunOptions opts;
    opts.threads = threads;
    if (*convert)
    {
      return cmd_convert(cifar, convert_out);
    }
    if (*part)
    {
      pspec.mode = parse_partition_mode(part_mode);
      return cmd_partition(part_data, part_out, pspec);
    }
    if (*run)
    {
      return cmd_run(build_config(run_config, run->remaining()), opts);
    }
    if (*sw)
    {
      ExperimentConfig const cfg       = build_config(sweep_config, sw->remaining());
      auto const             seed_list = split_list<std::uint64_t>(seeds, as_u64);
      auto const             rows      = sweep(cfg, knob, split_list<std::string>(values, as_string), seed_list, opts);
      std::cout << format_sweep(knob, rows, seed_list);
      return kExitOk;
    }
    if (*report)
    {
      return cmd_report(metrics, report_out);
    }
  }
  catch (ConfigError const &e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  catch (SpecError const &e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  catch (std::exception const &e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
