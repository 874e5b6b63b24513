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
#include "semifed/model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace semifed {

/// One model's opinion on one sample. label is empty when the model abstains.
struct Vote
{
  std::size_t                model_id{0};
  std::optional<std::size_t> label;
  double                     confidence{0.0};  // max class probability
};

/// argmax of probs (lowest index on ties) if its probability reaches gamma, else abstain.
Vote confident_prediction(std::span<double const> probs, double gamma, std::size_t model_id = 0);
Vote confident_prediction(ClassifierSpec const &spec, ModelParams const &model, Tensor const &x,
                          double gamma, std::size_t model_id = 0);

struct VoteTally
{
  std::uint64_t              sample_id{0};
  std::vector<std::size_t>   counts;      // per class, abstentions excluded
  std::size_t                s_x{0};      // largest class count
  std::optional<std::size_t> winner;      // empty with no votes or a tie at s_x
  double                     mean_conf{0.0};  // mean confidence of the winner's voters
};

VoteTally tally_votes(std::uint64_t sample_id, std::span<Vote const> votes, std::size_t num_classes);

struct PseudoLabelRule
{
  double      gamma{0.95};
  std::size_t agreement{11};  // u
  std::size_t cap{1000};
};

struct Selection
{
  std::uint64_t sample_id{0};
  std::size_t   label{0};
  double        mean_conf{0.0};

  bool operator==(Selection const &) const = default;
};

/// Class probabilities of every model on the same list of samples.
struct PredictionPanel
{
  std::vector<std::uint64_t> sample_ids;
  std::vector<Tensor>        per_model;  // each [N, C]
};

/// Every sample with a unique winner and s_x >= u, by descending mean_conf then ascending id.
std::vector<Selection> rank_candidates(PredictionPanel const &panel, PseudoLabelRule const &rule);

/// Threshold -> tally -> s_x >= u -> the first `cap` of rank_candidates().
std::vector<Selection> select_pseudo_labels(PredictionPanel const &panel, PseudoLabelRule const &rule);

/// Predictions of every model on the client's unlabeled pool.
PredictionPanel predict_panel(ClassifierSpec const &spec, std::span<ModelParams const> models,
                              std::vector<Example> const &unlabeled);

struct PseudoLabelStats
{
  std::size_t            candidates{0};  // samples with s_x >= u before the cap
  std::size_t            moved{0};
  std::optional<double>  precision;      // empty when nothing moved
  std::vector<Selection> selected;
};

/**
 * Runs the pseudo-labeling procedure on one client: samples selected from its unlabeled pool
 * move permanently to the labeled pool carrying the winning class. With u > models.size()
 * nothing can qualify and nothing moves.
 */
PseudoLabelStats pseudo_label_client(ClientDataset &client, ClassifierSpec const &spec,
                                     std::span<ModelParams const> models,
                                     PseudoLabelRule const &rule, GroundTruth const *hidden);

/// Fraction of selections matching the hidden label; empty for no selections.
std::optional<double> pseudo_precision(std::span<Selection const> moved, GroundTruth const &hidden);

}  // namespace semifed
