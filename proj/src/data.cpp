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

#include "semifed/data.hpp"

#include "semifed/error.hpp"
#include "semifed/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace semifed {

namespace {

enum Stream : std::uint64_t
{
  kSplitStream     = 1,
  kDirichletStream = 2,
  kShuffleStream   = 3,
  kIidStream       = 4,
};

// Indices of `pool` grouped by class, using the hidden labels for unlabeled entries.
std::vector<std::vector<std::size_t>> by_class(std::vector<Example> const &pool,
                                               GroundTruth const &hidden, std::size_t classes)
{
  std::vector<std::vector<std::size_t>> groups(classes);
  for (std::size_t i = 0; i < pool.size(); ++i)
  {
    int label = pool[i].label;
    if (label == kUnlabeled)
    {
      label = hidden.label_of(pool[i].id).value_or(kUnlabeled);
    }
    if (label < 0 || static_cast<std::size_t>(label) >= classes)
    {
      throw LabelError("example " + std::to_string(pool[i].id) + " has no valid class for partitioning");
    }
    groups[static_cast<std::size_t>(label)].push_back(i);
  }
  return groups;
}

}  // namespace

std::vector<std::size_t> Dataset::class_counts() const
{
  std::vector<std::size_t> counts(num_classes, 0);
  for (auto const &e : examples)
  {
    if (e.label >= 0 && static_cast<std::size_t>(e.label) < num_classes)
    {
      ++counts[static_cast<std::size_t>(e.label)];
    }
  }
  return counts;
}

std::optional<int> GroundTruth::label_of(std::uint64_t id) const
{
  auto it = labels_.find(id);
  if (it == labels_.end())
  {
    return std::nullopt;
  }
  return it->second;
}

std::string to_string(PartitionMode mode)
{
  return mode == PartitionMode::Iid ? "iid" : "dirichlet";
}

PartitionMode parse_partition_mode(std::string const &s)
{
  if (s == "iid")
  {
    return PartitionMode::Iid;
  }
  if (s == "dirichlet")
  {
    return PartitionMode::Dirichlet;
  }
  throw SpecError("unknown partition mode '" + s + "' (expected iid or dirichlet)");
}

LabeledSplit split_labeled(Dataset const &data, std::size_t n_labeled, std::uint64_t seed)
{
  if (n_labeled > data.size())
  {
    throw SpecError("cannot label " + std::to_string(n_labeled) + " of " +
                    std::to_string(data.size()) + " examples");
  }
  if (data.num_classes == 0)
  {
    throw SpecError("dataset declares no classes");
  }
  Rng         rng(derive_seed(seed, kSplitStream));
  auto        groups = by_class(data.examples, GroundTruth{}, data.num_classes);
  std::size_t const classes = data.num_classes;

  std::vector<bool> chosen(data.size(), false);
  for (std::size_t c = 0; c < classes; ++c)
  {
    std::size_t const want = n_labeled / classes + (c < n_labeled % classes ? 1 : 0);
    if (want > groups[c].size())
    {
      throw SpecError("class " + std::to_string(c) + " has " + std::to_string(groups[c].size()) +
                      " examples, cannot label " + std::to_string(want));
    }
    rng.shuffle(groups[c]);
    for (std::size_t i = 0; i < want; ++i)
    {
      chosen[groups[c][i]] = true;
    }
  }

  LabeledSplit split;
  for (std::size_t i = 0; i < data.size(); ++i)
  {
    Example const &e = data.examples[i];
    if (chosen[i])
    {
      split.labeled.push_back(e);
    }
    else
    {
      Example hidden = e;
      split.hidden.record(e.id, e.label);
      hidden.label = kUnlabeled;
      split.unlabeled.push_back(std::move(hidden));
    }
  }
  return split;
}

std::vector<std::size_t> largest_remainder(std::vector<double> const &weights, std::size_t total)
{
  double const weight_sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (weights.empty() || !(weight_sum > 0.0))
  {
    throw ContractError("largest_remainder: weights must have a positive sum");
  }
  std::vector<std::size_t> counts(weights.size());
  std::vector<double>      remainders(weights.size());
  std::size_t              assigned = 0;
  for (std::size_t k = 0; k < weights.size(); ++k)
  {
    double const quota = weights[k] / weight_sum * static_cast<double>(total);
    counts[k]          = static_cast<std::size_t>(std::floor(quota));
    remainders[k]      = quota - std::floor(quota);
    assigned += counts[k];
  }
  // floating error can leave the floors one above total; trim from the smallest remainders
  while (assigned > total)
  {
    std::size_t worst = 0;
    for (std::size_t k = 0; k < counts.size(); ++k)
    {
      if (counts[k] > 0 && (counts[worst] == 0 || remainders[k] < remainders[worst]))
      {
        worst = k;
      }
    }
    --counts[worst];
    --assigned;
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t i = 0; assigned < total; i = (i + 1) % order.size())
  {
    ++counts[order[i]];
    ++assigned;
  }
  return counts;
}

Partition partition_split(LabeledSplit split, std::size_t num_classes, PartitionSpec const &spec)
{
  if (spec.clients == 0)
  {
    throw SpecError("partition needs at least one client");
  }
  if (spec.mode == PartitionMode::Dirichlet && !(spec.alpha > 0.0))
  {
    throw SpecError("dirichlet concentration must be positive");
  }
  std::size_t const K = spec.clients;
  Partition         result;
  result.clients.resize(K);
  for (std::size_t k = 0; k < K; ++k)
  {
    result.clients[k].client_id = k;
  }

  Rng dirichlet_rng(derive_seed(spec.seed, kDirichletStream));
  Rng shuffle_rng(derive_seed(spec.seed, kShuffleStream));
  Rng iid_rng(derive_seed(spec.seed, kIidStream));

  std::vector<std::vector<double>> shared_props;
  if (spec.mode == PartitionMode::Dirichlet)
  {
    for (std::size_t c = 0; c < num_classes; ++c)
    {
      shared_props.push_back(dirichlet_rng.dirichlet(K, spec.alpha));
    }
  }

  auto assign_pool = [&](std::vector<Example> &pool, bool labeled_pool) {
    auto        groups    = by_class(pool, split.hidden, num_classes);
    std::size_t iid_start = 0;
    for (std::size_t c = 0; c < num_classes; ++c)
    {
      auto &members = groups[c];
      if (spec.mode == PartitionMode::Iid)
      {
        iid_rng.shuffle(members);
        for (std::size_t i = 0; i < members.size(); ++i)
        {
          auto &client = result.clients[(iid_start + i) % K];
          (labeled_pool ? client.labeled : client.unlabeled).push_back(std::move(pool[members[i]]));
        }
        iid_start = (iid_start + members.size()) % K;
        continue;
      }
      std::vector<double> const props = (labeled_pool || !spec.independent_draws)
                                            ? shared_props[c]
                                            : dirichlet_rng.dirichlet(K, spec.alpha);
      auto const counts = largest_remainder(props, members.size());
      shuffle_rng.shuffle(members);
      std::size_t next = 0;
      for (std::size_t k = 0; k < K; ++k)
      {
        auto &dst = labeled_pool ? result.clients[k].labeled : result.clients[k].unlabeled;
        for (std::size_t i = 0; i < counts[k]; ++i)
        {
          dst.push_back(std::move(pool[members[next++]]));
        }
      }
    }
  };
  assign_pool(split.labeled, true);
  assign_pool(split.unlabeled, false);

  for (auto const &client : result.clients)
  {
    if (client.labeled.empty())
    {
      result.warnings.push_back("client " + std::to_string(client.client_id) +
                                " received no labeled examples");
    }
  }
  result.hidden = std::move(split.hidden);
  return result;
}

Partition partition(Dataset const &data, PartitionSpec const &spec)
{
  if (spec.n_labeled_total > data.size())
  {
    throw SpecError("n_labeled_total " + std::to_string(spec.n_labeled_total) +
                    " exceeds dataset size " + std::to_string(data.size()));
  }
  return partition_split(split_labeled(data, spec.n_labeled_total, spec.seed), data.num_classes, spec);
}

Dataset make_synthetic_blobs(std::size_t n, std::size_t num_classes, std::size_t dim,
                             double separation, std::uint64_t seed, std::uint64_t first_id)
{
  if (num_classes == 0 || dim == 0 || n < num_classes)
  {
    throw SpecError("blobs need n >= C >= 1 and dim >= 1");
  }
  std::vector<std::vector<double>> centers(num_classes, std::vector<double>(dim, 0.0));
  for (std::size_t c = 0; c < num_classes; ++c)
  {
    auto const cd = static_cast<double>(c);
    if (dim == 1 || num_classes <= 2)
    {
      centers[c][0] = separation * (cd - static_cast<double>(num_classes - 1) / 2.0);
    }
    else
    {
      double const angle  = 2.0 * std::numbers::pi * cd / static_cast<double>(num_classes);
      double const radius = separation / (2.0 * std::sin(std::numbers::pi / static_cast<double>(num_classes)));
      centers[c][0]       = radius * std::cos(angle);
      centers[c][1]       = radius * std::sin(angle);
    }
  }

  Rng     rng(seed);
  Dataset out;
  out.sample_shape = {dim};
  out.num_classes  = num_classes;
  out.examples.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    std::size_t const c = i % num_classes;
    Example           e;
    e.id    = first_id + i;
    e.label = static_cast<int>(c);
    e.features.resize(dim);
    for (std::size_t d = 0; d < dim; ++d)
    {
      e.features[d] = static_cast<float>(centers[c][d] + rng.normal());
    }
    out.examples.push_back(std::move(e));
  }
  return out;
}

Dataset take_holdout(Dataset &data, std::size_t n, std::uint64_t seed)
{
  if (n > data.size())
  {
    throw SpecError("holdout of " + std::to_string(n) + " exceeds dataset size");
  }
  Rng                      rng(seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<bool> held(data.size(), false);
  for (std::size_t i = 0; i < n; ++i)
  {
    held[order[i]] = true;
  }
  Dataset holdout{data.sample_shape, data.num_classes, {}};
  std::vector<Example> kept;
  for (std::size_t i = 0; i < data.size(); ++i)
  {
    (held[i] ? holdout.examples : kept).push_back(std::move(data.examples[i]));
  }
  data.examples = std::move(kept);
  return holdout;
}

}  // namespace semifed
