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

#include "semifed/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace semifed {

inline constexpr int kUnlabeled = -1;

struct Example
{
  std::uint64_t      id{0};
  std::vector<float> features;
  int                label{kUnlabeled};

  bool operator==(Example const &) const = default;
};

struct Dataset
{
  Shape                sample_shape;
  std::size_t          num_classes{0};
  std::vector<Example> examples;

  std::size_t size() const noexcept
  {
    return examples.size();
  }

  /// Examples per class; unlabeled examples are not counted.
  std::vector<std::size_t> class_counts() const;
};

/**
 * True labels of samples whose label was hidden from training.
 *
 * Only the metrics path (pseudo-label precision) and setup-time partitioning read this; it is
 * never attached to the examples a client trains on.
 */
class GroundTruth
{
public:
  void record(std::uint64_t id, int label)
  {
    labels_[id] = label;
  }
  std::optional<int> label_of(std::uint64_t id) const;
  std::size_t        size() const noexcept
  {
    return labels_.size();
  }

private:
  std::unordered_map<std::uint64_t, int> labels_;
};

struct ClientDataset
{
  std::size_t          client_id{0};
  std::vector<Example> labeled;
  std::vector<Example> unlabeled;
};

struct LabeledSplit
{
  std::vector<Example> labeled;
  std::vector<Example> unlabeled;  // label == kUnlabeled
  GroundTruth          hidden;
};

enum class PartitionMode
{
  Iid,
  Dirichlet,
};

std::string   to_string(PartitionMode mode);
PartitionMode parse_partition_mode(std::string const &s);

struct PartitionSpec
{
  PartitionMode mode{PartitionMode::Dirichlet};
  double        alpha{0.5};
  std::size_t   clients{10};
  std::size_t   n_labeled_total{0};
  std::uint64_t seed{0};
  /// Draw separate Dirichlet proportions for the labeled and unlabeled pools.
  bool independent_draws{false};
};

struct Partition
{
  std::vector<ClientDataset> clients;
  GroundTruth                hidden;
  std::vector<std::string>   warnings;
};

/**
 * Class-balanced labeled subset of exactly n_labeled (n / C per class, remainder one extra
 * per class in class order). The rest is returned unlabeled with its labels moved into
 * the GroundTruth. Throws SpecError if n_labeled exceeds the dataset or a class runs short.
 */
LabeledSplit split_labeled(Dataset const &data, std::size_t n_labeled, std::uint64_t seed);

/**
 * Splits `data` into labeled/unlabeled pools and assigns both pools to spec.clients clients.
 *
 * Dirichlet mode draws p_c ~ Dir_K(alpha) per class and gives client k a largest-remainder
 * rounded share p_{c,k} * N_c of class c. iid mode deals each shuffled class round-robin.
 * A client left without labeled data is reported in Partition::warnings.
 */
Partition partition(Dataset const &data, PartitionSpec const &spec);

/// Same as partition() on an existing split.
Partition partition_split(LabeledSplit split, std::size_t num_classes, PartitionSpec const &spec);

/// Integer counts summing to total, proportional to weights, by largest remainder
/// (ties go to the lower index).
std::vector<std::size_t> largest_remainder(std::vector<double> const &weights, std::size_t total);

/**
 * n points from C unit-variance isotropic Gaussians in `dim` dimensions, classes balanced
 * (example i has class i mod C). Centers sit on a circle in the first two coordinates with
 * neighbouring centers `separation` apart (on a line when dim == 1 or C == 2).
 */
Dataset make_synthetic_blobs(std::size_t n, std::size_t num_classes, std::size_t dim,
                             double separation, std::uint64_t seed, std::uint64_t first_id = 0);

/// Removes n examples (uniformly at random) from data and returns them as a new dataset.
Dataset take_holdout(Dataset &data, std::size_t n, std::uint64_t seed);

}  // namespace semifed
