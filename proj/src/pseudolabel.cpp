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

#include "semifed/pseudolabel.hpp"

#include "semifed/error.hpp"

#include <algorithm>
#include <unordered_map>

namespace semifed {

namespace {

constexpr std::size_t kPredictChunk = 256;

}  // namespace

Vote confident_prediction(std::span<double const> probs, double gamma, std::size_t model_id)
{
  if (probs.empty())
  {
    throw DimensionError("confident_prediction: empty probability vector");
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < probs.size(); ++c)
  {
    if (probs[c] > probs[best])
    {
      best = c;
    }
  }
  Vote v{model_id, std::nullopt, probs[best]};
  if (probs[best] >= gamma)
  {
    v.label = best;
  }
  return v;
}

Vote confident_prediction(ClassifierSpec const &spec, ModelParams const &model, Tensor const &x,
                          double gamma, std::size_t model_id)
{
  Tensor const p = predict(spec, model, x);
  return confident_prediction(p.values(), gamma, model_id);
}

VoteTally tally_votes(std::uint64_t sample_id, std::span<Vote const> votes, std::size_t num_classes)
{
  VoteTally t;
  t.sample_id = sample_id;
  t.counts.assign(num_classes, 0);
  for (auto const &v : votes)
  {
    if (v.label)
    {
      if (*v.label >= num_classes)
      {
        throw LabelError("vote for class " + std::to_string(*v.label) + " out of range");
      }
      ++t.counts[*v.label];
    }
  }
  std::size_t ties = 0;
  for (std::size_t c = 0; c < num_classes; ++c)
  {
    if (t.counts[c] > t.s_x)
    {
      t.s_x    = t.counts[c];
      t.winner = c;
      ties     = 1;
    }
    else if (t.counts[c] == t.s_x && t.s_x > 0)
    {
      ++ties;
    }
  }
  if (ties != 1)
  {
    t.winner.reset();
  }
  if (t.winner)
  {
    double total = 0.0;
    for (auto const &v : votes)
    {
      if (v.label == t.winner)
      {
        total += v.confidence;
      }
    }
    t.mean_conf = total / static_cast<double>(t.s_x);
  }
  return t;
}

std::vector<Selection> rank_candidates(PredictionPanel const &panel, PseudoLabelRule const &rule)
{
  std::size_t const n = panel.sample_ids.size();
  if (panel.per_model.empty() || n == 0)
  {
    return {};
  }
  std::size_t const classes = panel.per_model.front().dim(1);
  for (auto const &p : panel.per_model)
  {
    if (p.rank() != 2 || p.dim(0) != n || p.dim(1) != classes)
    {
      throw DimensionError("prediction panel entry " + shape_str(p.shape()) + " does not match " +
                           std::to_string(n) + " samples");
    }
  }

  std::vector<Selection> candidates;
  std::vector<Vote>      votes(panel.per_model.size());
  for (std::size_t i = 0; i < n; ++i)
  {
    for (std::size_t m = 0; m < panel.per_model.size(); ++m)
    {
      votes[m] = confident_prediction(panel.per_model[m].values().subspan(i * classes, classes),
                                      rule.gamma, m);
    }
    VoteTally const t = tally_votes(panel.sample_ids[i], votes, classes);
    if (t.winner && t.s_x >= rule.agreement)
    {
      candidates.push_back({t.sample_id, *t.winner, t.mean_conf});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](Selection const &a, Selection const &b) {
    if (a.mean_conf != b.mean_conf)
    {
      return a.mean_conf > b.mean_conf;
    }
    return a.sample_id < b.sample_id;
  });
  return candidates;
}

std::vector<Selection> select_pseudo_labels(PredictionPanel const &panel, PseudoLabelRule const &rule)
{
  auto ranked = rank_candidates(panel, rule);
  if (ranked.size() > rule.cap)
  {
    ranked.resize(rule.cap);
  }
  return ranked;
}

PredictionPanel predict_panel(ClassifierSpec const &spec, std::span<ModelParams const> models,
                              std::vector<Example> const &unlabeled)
{
  PredictionPanel panel;
  panel.sample_ids.reserve(unlabeled.size());
  for (auto const &e : unlabeled)
  {
    panel.sample_ids.push_back(e.id);
  }
  if (unlabeled.empty())
  {
    return panel;
  }
  for (auto const &model : models)
  {
    std::vector<double> probs;
    probs.reserve(unlabeled.size() * spec.num_classes);
    for (std::size_t start = 0; start < unlabeled.size(); start += kPredictChunk)
    {
      std::size_t const                        end = std::min(unlabeled.size(), start + kPredictChunk);
      std::vector<std::vector<float> const *> samples;
      for (std::size_t i = start; i < end; ++i)
      {
        samples.push_back(&unlabeled[i].features);
      }
      Tensor const p = predict_batch(spec, model, make_batch(spec, samples));
      probs.insert(probs.end(), p.values().begin(), p.values().end());
    }
    panel.per_model.emplace_back(Shape{unlabeled.size(), spec.num_classes}, std::move(probs));
  }
  return panel;
}

PseudoLabelStats pseudo_label_client(ClientDataset &client, ClassifierSpec const &spec,
                                     std::span<ModelParams const> models,
                                     PseudoLabelRule const &rule, GroundTruth const *hidden)
{
  if (rule.agreement > models.size())
  {
    // u = K+2 and beyond can never be met; nothing moves
    return {};
  }
  if (!(rule.gamma > 0.0 && rule.gamma <= 1.0))
  {
    throw ContractError("confidence threshold must lie in (0, 1]");
  }
  PseudoLabelStats stats;
  auto             ranked = rank_candidates(predict_panel(spec, models, client.unlabeled), rule);
  stats.candidates        = ranked.size();
  if (ranked.size() > rule.cap)
  {
    ranked.resize(rule.cap);
  }

  std::unordered_map<std::uint64_t, std::size_t> label_of;
  for (auto const &s : ranked)
  {
    label_of.emplace(s.sample_id, s.label);
  }
  std::vector<Example> remaining;
  remaining.reserve(client.unlabeled.size() - ranked.size());
  for (auto &e : client.unlabeled)
  {
    auto it = label_of.find(e.id);
    if (it == label_of.end())
    {
      remaining.push_back(std::move(e));
      continue;
    }
    e.label = static_cast<int>(it->second);
    client.labeled.push_back(std::move(e));
  }
  client.unlabeled = std::move(remaining);

  stats.moved = ranked.size();
  if (hidden != nullptr)
  {
    stats.precision = pseudo_precision(ranked, *hidden);
  }
  stats.selected = std::move(ranked);
  return stats;
}

std::optional<double> pseudo_precision(std::span<Selection const> moved, GroundTruth const &hidden)
{
  if (moved.empty())
  {
    return std::nullopt;
  }
  std::size_t correct = 0;
  for (auto const &s : moved)
  {
    auto truth = hidden.label_of(s.sample_id);
    if (truth && *truth >= 0 && static_cast<std::size_t>(*truth) == s.label)
    {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(moved.size());
}

}  // namespace semifed
