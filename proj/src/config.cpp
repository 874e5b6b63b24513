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

#include <algorithm>
#include <charconv>
#include <functional>
#include <sstream>

namespace semifed {

namespace {

std::string trim(std::string const &s)
{
  auto const b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
  {
    return {};
  }
  auto const e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(std::string const &s, char sep)
{
  std::vector<std::string> out;
  std::string              item;
  std::istringstream       in(s);
  while (std::getline(in, item, sep))
  {
    item = trim(item);
    if (!item.empty())
    {
      out.push_back(item);
    }
  }
  return out;
}

template <typename F>
std::string fmt_real(F v)
{
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string const &key, std::string const &s)
{
  double      v{};
  auto const *end = s.data() + s.size();
  auto        res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end)
  {
    throw ConfigError(key + ": expected a number, got '" + s + "'");
  }
  return v;
}

std::size_t parse_size(std::string const &key, std::string const &s)
{
  std::uint64_t v{};
  auto const   *end = s.data() + s.size();
  auto          res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end)
  {
    throw ConfigError(key + ": expected a nonnegative integer, got '" + s + "'");
  }
  return static_cast<std::size_t>(v);
}

bool parse_bool(std::string const &key, std::string const &s)
{
  if (s == "true" || s == "1" || s == "yes")
  {
    return true;
  }
  if (s == "false" || s == "0" || s == "no")
  {
    return false;
  }
  throw ConfigError(key + ": expected true or false, got '" + s + "'");
}

std::vector<std::size_t> parse_sizes(std::string const &key, std::string const &s)
{
  std::vector<std::size_t> out;
  for (auto const &item : split(s, ','))
  {
    out.push_back(parse_size(key, item));
  }
  return out;
}

template <typename Range>
std::string join_sizes(Range const &r)
{
  std::string out;
  for (auto v : r)
  {
    out += (out.empty() ? "" : ",") + std::to_string(v);
  }
  return out;
}

struct KeyDef
{
  std::string                                                    name;
  std::function<void(ExperimentConfig &, std::string const &)>   set;
  std::function<std::string(ExperimentConfig const &)>           get;
};

std::vector<KeyDef> const &key_table()
{
  using C = ExperimentConfig;
  using S = std::string const &;
  static std::vector<KeyDef> const table = [] {
    std::vector<KeyDef> t;
    auto add = [&](std::string name, std::function<void(C &, S)> set, std::function<std::string(C const &)> get) {
      t.push_back({std::move(name), std::move(set), std::move(get)});
    };
    auto add_size = [&](std::string name, std::function<std::size_t &(C &)> ref) {
      std::string const k = name;
      add(
          name, [k, ref](C &c, S v) { ref(c) = parse_size(k, v); },
          [ref](C const &c) { return std::to_string(ref(const_cast<C &>(c))); });
    };
    auto add_double = [&](std::string name, std::function<double &(C &)> ref) {
      std::string const k = name;
      add(
          name, [k, ref](C &c, S v) { ref(c) = parse_double(k, v); },
          [ref](C const &c) { return fmt_real(ref(const_cast<C &>(c))); });
    };
    auto add_float = [&](std::string name, std::function<float &(C &)> ref) {
      std::string const k = name;
      add(
          name, [k, ref](C &c, S v) { ref(c) = static_cast<float>(parse_double(k, v)); },
          [ref](C const &c) { return fmt_real(ref(const_cast<C &>(c))); });
    };
    auto add_bool = [&](std::string name, std::function<bool &(C &)> ref) {
      std::string const k = name;
      add(
          name, [k, ref](C &c, S v) { ref(c) = parse_bool(k, v); },
          [ref](C const &c) { return ref(const_cast<C &>(c)) ? std::string("true") : std::string("false"); });
    };
    auto add_string = [&](std::string name, std::function<std::string &(C &)> ref) {
      add(
          name, [ref](C &c, S v) { ref(c) = v; }, [ref](C const &c) { return ref(const_cast<C &>(c)); });
    };

    add("method", [](C &c, S v) { c.method = parse_method(v); }, [](C const &c) { return to_string(c.method); });
    add(
        "seed", [](C &c, S v) { c.seed = parse_size("seed", v); },
        [](C const &c) { return std::to_string(c.seed); });
    add_string("output", [](C &c) -> std::string & { return c.output_dir; });

    add_string("data.source", [](C &c) -> std::string & { return c.data.source; });
    add_string("data.path", [](C &c) -> std::string & { return c.data.path; });
    add_string("data.test_path", [](C &c) -> std::string & { return c.data.test_path; });
    add_size("data.n", [](C &c) -> std::size_t & { return c.data.n; });
    add_size("data.test_n", [](C &c) -> std::size_t & { return c.data.test_n; });
    add_size("data.classes", [](C &c) -> std::size_t & { return c.data.classes; });
    add_size("data.dim", [](C &c) -> std::size_t & { return c.data.dim; });
    add_double("data.separation", [](C &c) -> double & { return c.data.separation; });
    add_size("data.holdout", [](C &c) -> std::size_t & { return c.data.holdout; });

    add(
        "partition.mode", [](C &c, S v) { c.partition.mode = parse_partition_mode(v); },
        [](C const &c) { return to_string(c.partition.mode); });
    add_double("partition.alpha", [](C &c) -> double & { return c.partition.alpha; });
    add_size("partition.clients", [](C &c) -> std::size_t & { return c.partition.clients; });
    add_size("partition.n_labeled", [](C &c) -> std::size_t & { return c.partition.n_labeled_total; });
    add_bool("partition.independent_draws", [](C &c) -> bool & { return c.partition.independent_draws; });

    add(
        "model.kind", [](C &c, S v) { c.model_kind = parse_model_kind(v); },
        [](C const &c) { return to_string(c.model_kind); });
    add(
        "model.hidden", [](C &c, S v) { c.model_hidden = parse_sizes("model.hidden", v); },
        [](C const &c) { return join_sizes(c.model_hidden); });
    add(
        "model.channels", [](C &c, S v) { c.model_channels = parse_sizes("model.channels", v); },
        [](C const &c) { return join_sizes(c.model_channels); });

    add_size("plan.rounds", [](C &c) -> std::size_t & { return c.plan.rounds; });
    add(
        "plan.pseudo_rounds",
        [](C &c, S v) {
          auto const rounds = parse_sizes("plan.pseudo_rounds", v);
          c.plan.pseudo_rounds = std::set<std::size_t>(rounds.begin(), rounds.end());
        },
        [](C const &c) { return join_sizes(c.plan.pseudo_rounds); });
    add_size("plan.epochs", [](C &c) -> std::size_t & { return c.plan.epochs; });
    add_size("plan.batch_labeled", [](C &c) -> std::size_t & { return c.plan.batch_labeled; });
    add_size("plan.batch_unlabeled", [](C &c) -> std::size_t & { return c.plan.batch_unlabeled; });
    add_float("plan.lr", [](C &c) -> float & { return c.plan.sgd.learning_rate; });
    add_float("plan.momentum", [](C &c) -> float & { return c.plan.sgd.momentum; });
    add_float("plan.l2", [](C &c) -> float & { return c.plan.sgd.l2_coeff; });
    add_double("plan.lambda_u", [](C &c) -> double & { return c.plan.lambda_u; });
    add(
        "plan.gamma",
        [](C &c, S v) {
          if (v.find(':') == std::string::npos)
          {
            c.gamma_all = parse_double("plan.gamma", v);
            c.plan.gamma.clear();
            return;
          }
          c.gamma_all.reset();
          c.plan.gamma.clear();
          for (auto const &item : split(v, ','))
          {
            auto const colon = item.find(':');
            if (colon == std::string::npos)
            {
              throw ConfigError("plan.gamma: expected round:threshold pairs, got '" + item + "'");
            }
            c.plan.gamma[parse_size("plan.gamma", trim(item.substr(0, colon)))] =
                parse_double("plan.gamma", trim(item.substr(colon + 1)));
          }
        },
        [](C const &c) {
          if (c.gamma_all)
          {
            return fmt_real(*c.gamma_all);
          }
          std::string out;
          for (auto const &[r, g] : c.plan.gamma)
          {
            out += (out.empty() ? "" : ",") + std::to_string(r) + ":" + fmt_real(g);
          }
          return out;
        });
    add_size("plan.agreement", [](C &c) -> std::size_t & { return c.plan.agreement; });
    add_size("plan.cap", [](C &c) -> std::size_t & { return c.plan.cap; });
    add_bool("plan.stop_grad_target", [](C &c) -> bool & { return c.plan.consistency.stop_gradient_on_target; });
    add_string("plan.lr_schedule", [](C &c) -> std::string & { return c.lr_schedule; });

    add_size("augment.n_ops", [](C &c) -> std::size_t & { return c.plan.augment.n_ops; });
    add(
        "augment.magnitude",
        [](C &c, S v) { c.plan.augment.magnitude = static_cast<int>(parse_size("augment.magnitude", v)); },
        [](C const &c) { return std::to_string(c.plan.augment.magnitude); });
    add_double("augment.sigma", [](C &c) -> double & { return c.plan.noise_sigma; });
    add_bool("augment.weak_labeled", [](C &c) -> bool & { return c.plan.weak_augment_labeled; });
    return t;
  }();
  return table;
}

KeyDef const &find_key(std::string const &key)
{
  for (auto const &k : key_table())
  {
    if (k.name == key)
    {
      return k;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

std::string to_string(Method m)
{
  switch (m)
  {
  case Method::Supervised:
    return "supervised";
  case Method::ConsistencyOnly:
    return "consistency-only";
  case Method::SemiFed:
    return "semifed";
  }
  return "?";
}

Method parse_method(std::string const &s)
{
  if (s == "supervised")
  {
    return Method::Supervised;
  }
  if (s == "consistency-only")
  {
    return Method::ConsistencyOnly;
  }
  if (s == "semifed")
  {
    return Method::SemiFed;
  }
  throw ConfigError("unknown method '" + s + "' (expected supervised, consistency-only or semifed)");
}

ExperimentConfig default_config()
{
  ExperimentConfig c;
  c.partition.mode            = PartitionMode::Dirichlet;
  c.partition.alpha           = 0.5;
  c.partition.clients         = 10;
  c.partition.n_labeled_total = 4000;
  c.plan.rounds               = 300;
  c.plan.pseudo_rounds        = {50, 100, 200};
  c.plan.gamma                = {{50, 0.9}, {100, 0.85}, {200, 0.7}};
  c.plan.epochs               = 10;
  c.plan.batch_labeled        = 64;
  c.plan.batch_unlabeled      = 64;
  c.plan.sgd                  = SgdConfig{0.3F, 0.9F, 1e-4F};
  c.plan.lambda_u             = 1.0;
  c.plan.agreement            = 11;
  c.plan.cap                  = 1000;
  c.plan.augment              = AugmentPolicy{2, 9};
  return c;
}

ExperimentConfig preset(std::string const &name)
{
  ExperimentConfig c = default_config();
  if (name == "cifar10")
  {
    c.data.source   = "sfds";
    c.data.classes  = 10;
    c.model_kind    = ModelKind::SmallCnn;
    c.model_hidden  = {64};
    c.model_channels = {16, 32};
    return c;
  }
  if (name == "svhn")
  {
    c.data.source       = "sfds";
    c.data.classes      = 10;
    c.model_kind        = ModelKind::SmallCnn;
    c.model_hidden      = {64};
    c.model_channels    = {16, 32};
    c.plan.epochs       = 5;
    c.plan.pseudo_rounds = {50, 100};
    c.plan.gamma.clear();
    c.gamma_all = 0.98;
    return c;
  }
  if (name == "desk-blobs")
  {
    c.data.source               = "synthetic";
    c.data.n                    = 4000;
    c.data.test_n               = 2000;
    c.data.classes              = 4;
    c.data.dim                  = 2;
    c.data.separation           = 4.5;
    c.partition.n_labeled_total = 40;
    c.model_kind                = ModelKind::Mlp;
    c.model_hidden              = {32};
    c.plan.rounds               = 60;
    c.plan.pseudo_rounds        = {20, 40};
    c.plan.gamma.clear();
    c.gamma_all          = 0.95;
    c.plan.epochs        = 10;
    c.plan.sgd           = SgdConfig{0.05F, 0.9F, 1e-4F};
    c.plan.noise_sigma   = 0.3;
    c.plan.cap           = 1000;
    return c;
  }
  throw ConfigError("unknown preset '" + name + "' (expected cifar10, svhn or desk-blobs)");
}

RoundPlan ExperimentConfig::effective_plan() const
{
  RoundPlan p = plan;
  if (gamma_all)
  {
    p.gamma.clear();
    for (auto t : p.pseudo_rounds)
    {
      p.gamma[t] = *gamma_all;
    }
  }
  if (method == Method::Supervised)
  {
    p.lambda_u = 0.0;
  }
  if (method != Method::SemiFed)
  {
    p.pseudo_rounds.clear();
    p.gamma.clear();
  }
  return p;
}

ClassifierSpec ExperimentConfig::classifier(Shape const &input_shape, std::size_t num_classes) const
{
  ClassifierSpec spec;
  spec.kind        = model_kind;
  spec.input_shape = input_shape;
  spec.hidden      = model_hidden;
  spec.num_classes = num_classes;
  if (model_kind == ModelKind::SmallCnn)
  {
    spec.channels = model_channels;
  }
  return spec;
}

std::vector<std::string> ExperimentConfig::validate() const
{
  std::vector<std::string> out;
  if (data.source == "synthetic")
  {
    if (data.classes == 0 || data.dim == 0)
    {
      out.push_back("data.classes and data.dim must be positive");
    }
    if (data.n < data.classes || data.test_n == 0)
    {
      out.push_back("data.n must be at least data.classes and data.test_n positive");
    }
    if (data.holdout + partition.n_labeled_total > data.n)
    {
      out.push_back("partition.n_labeled plus data.holdout exceeds data.n");
    }
    if (model_kind != ModelKind::Mlp)
    {
      out.push_back("synthetic vector data needs model.kind = mlp");
    }
  }
  else if (data.source == "sfds")
  {
    if (data.path.empty())
    {
      out.push_back("data.source = sfds needs data.path");
    }
    if (data.test_path.empty() && data.holdout == 0)
    {
      out.push_back("data.source = sfds needs data.test_path or data.holdout");
    }
  }
  else
  {
    out.push_back("data.source must be synthetic or sfds, got '" + data.source + "'");
  }
  if (partition.clients == 0)
  {
    out.push_back("partition.clients must be at least 1");
  }
  if (partition.mode == PartitionMode::Dirichlet && !(partition.alpha > 0.0))
  {
    out.push_back("partition.alpha must be positive");
  }
  if (std::any_of(model_hidden.begin(), model_hidden.end(), [](auto w) { return w == 0; }))
  {
    out.push_back("model.hidden widths must be positive");
  }
  if (model_kind == ModelKind::SmallCnn)
  {
    if (model_hidden.size() != 1)
    {
      out.push_back("small-cnn needs exactly one model.hidden width");
    }
    if (model_channels.size() != 2 || model_channels[0] == 0 || model_channels[1] == 0)
    {
      out.push_back("small-cnn needs two positive model.channels");
    }
  }
  if (lr_schedule != "constant")
  {
    out.push_back("plan.lr_schedule '" + lr_schedule + "' is not supported (only constant)");
  }
  if (gamma_all && !(*gamma_all > 0.0 && *gamma_all <= 1.0))
  {
    out.push_back("plan.gamma must lie in (0, 1]");
  }
  for (auto &p : effective_plan().problems(partition.clients))
  {
    out.push_back("plan: " + p);
  }
  return out;
}

std::vector<std::string> const &config_keys()
{
  static std::vector<std::string> const keys = [] {
    std::vector<std::string> k;
    for (auto const &def : key_table())
    {
      k.push_back(def.name);
    }
    return k;
  }();
  return keys;
}

void set_key(ExperimentConfig &config, std::string const &key, std::string const &value)
{
  find_key(key).set(config, trim(value));
}

std::string get_key(ExperimentConfig const &config, std::string const &key)
{
  return find_key(key).get(config);
}

std::vector<std::pair<std::string, std::string>> parse_config_text(std::string const &text)
{
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream                               in(text);
  std::string                                      line;
  std::size_t                                      line_no = 0;
  while (std::getline(in, line))
  {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos)
    {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty())
    {
      continue;
    }
    auto const eq = line.find('=');
    if (eq == std::string::npos)
    {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

ExperimentConfig load_config(std::string const &text,
                             std::vector<std::pair<std::string, std::string>> const &overrides)
{
  auto entries = parse_config_text(text);
  entries.insert(entries.end(), overrides.begin(), overrides.end());

  std::vector<std::string> problems;
  ExperimentConfig         config = default_config();
  for (auto const &[key, value] : entries)
  {
    if (key == "preset")
    {
      try
      {
        config = preset(value);
      }
      catch (Error const &e)
      {
        problems.emplace_back(e.what());
      }
    }
  }
  for (auto const &[key, value] : entries)
  {
    if (key == "preset")
    {
      continue;
    }
    try
    {
      set_key(config, key, value);
    }
    catch (Error const &e)
    {
      problems.emplace_back(e.what());
    }
  }
  for (auto &p : config.validate())
  {
    problems.push_back(std::move(p));
  }
  if (!problems.empty())
  {
    std::string msg = "invalid configuration:";
    for (auto const &p : problems)
    {
      msg += "\n  - " + p;
    }
    throw ConfigError(msg);
  }
  return config;
}

std::string dump_config(ExperimentConfig const &config)
{
  std::string out;
  for (auto const &def : key_table())
  {
    out += def.name + " = " + def.get(config) + "\n";
  }
  return out;
}

}  // namespace semifed
