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

#include "semifed/augment.hpp"
#include "semifed/data.hpp"
#include "semifed/loss.hpp"
#include "semifed/metrics.hpp"
#include "semifed/model.hpp"
#include "semifed/optim.hpp"
#include "semifed/params.hpp"
#include "semifed/pseudolabel.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace semifed {

/// Every hyperparameter that governs one federated run.
struct RoundPlan
{
  std::size_t                   rounds{300};
  std::set<std::size_t>         pseudo_rounds;  // T_p
  std::size_t                   epochs{10};
  std::size_t                   batch_labeled{64};
  std::size_t                   batch_unlabeled{64};
  SgdConfig                     sgd;
  double                        lambda_u{1.0};
  std::map<std::size_t, double> gamma;  // pseudo round -> confidence threshold
  std::size_t                   agreement{11};
  std::size_t                   cap{1000};
  ConsistencyOptions            consistency;
  AugmentPolicy                 augment;
  double                        noise_sigma{0.5};  // consistency noise for vector inputs
  bool                          weak_augment_labeled{true};

  /// Threshold for pseudo round t. Throws ContractError if t has none.
  double gamma_at(std::size_t t) const;

  bool is_pseudo_round(std::size_t t) const
  {
    return pseudo_rounds.count(t) != 0;
  }

  /// Problems that make the plan unusable with `clients` clients; empty when valid.
  std::vector<std::string> problems(std::size_t clients) const;
};

struct ClientState
{
  ClientDataset data;
  /// Seed key of the client's random streams; defaults to its id.
  std::uint64_t seed_key{0};
  /// Latest global model received from the server.
  ModelParams params;
  /// The K local models followed by the new global; only filled after a pseudo round.
  std::vector<ModelParams> received_models;
};

struct ServerState
{
  ModelParams                        global;
  std::size_t                        round{0};
  std::map<std::size_t, ModelParams> model_dict;  // P, keyed by client id
};

struct LocalTrainingReport
{
  ModelParams                params;
  std::optional<double>      l_s;  // mean over steps that had the term
  std::optional<double>      l_u;
  std::size_t                labeled_seen{0};
  std::size_t                labeled_correct{0};
  std::size_t                steps{0};
  std::optional<std::string> warning;
};

/// Seed of client `seed_key`'s random streams in round t.
std::uint64_t client_round_seed(std::uint64_t global_seed, std::uint64_t seed_key, std::size_t round);

/**
 * Local update of one client for one round, starting from `start`.
 *
 * The random stream is Rng(derive_seed(round_seed, 0)) for batch sampling and
 * Rng(derive_seed(round_seed, 1)) for augmentation; velocity starts at zero each round.
 * Each epoch shuffles the unlabeled pool once and walks it in I = ceil(N_u / B_u)
 * batches (I = ceil(N_l / B_l) when the unlabeled pool is empty). The labeled batch of each
 * iteration holds min(B_l, N_l) samples taken in order from a shuffled permutation that is
 * redrawn whenever fewer than that many remain. The first permutation is drawn before the
 * first epoch's unlabeled shuffle.
 */
LocalTrainingReport client_local_training(ClassifierSpec const &spec, ClientDataset const &data,
                                          ModelParams const &start, RoundPlan const &plan,
                                          std::uint64_t round_seed);

/// Unweighted mean of the models, accumulated in double in the given order.
ModelParams fedavg(std::vector<ModelParams const *> const &models);

enum class ExecutionOrder
{
  Sequential,
  Reversed,
  Parallel,
};

struct RoundContext
{
  ClassifierSpec     spec;
  RoundPlan          plan;
  std::uint64_t      seed{0};
  ExecutionOrder     order{ExecutionOrder::Sequential};
  std::size_t        threads{1};
  GroundTruth const *hidden{nullptr};
};

/// Sends the new global to every client and, at pseudo rounds, the whole dictionary P too.
/// Everything passes through the wire format. Returns bytes received per client.
std::vector<std::uint64_t> broadcast_models(ServerState const &server, std::vector<ClientState> &clients,
                                            std::size_t round, bool pseudo_round);

/// Copies `params` through the wire format; throws ProtocolError if the copy differs.
ModelParams transmit(ModelParams const &params);

/**
 * One communication round: local training on every client, upload, FedAvg, broadcast, and
 * at pseudo rounds the pseudo-labeling procedure on every client.
 *
 * Returns one record per client (in client-id order) followed by the server record, all
 * tagged with round = server.round after the increment. test_acc is left empty.
 * Any client failure propagates and leaves the server state untouched.
 */
std::vector<MetricsRecord> run_round(ServerState &server, std::vector<ClientState> &clients,
                                     RoundContext const &ctx);

/// Runs fn(i) for i in [0, n) on up to `threads` threads.
void parallel_for(std::size_t n, std::size_t threads, std::function<void(std::size_t)> const &fn);

/// Worker count: hardware concurrency capped by SEMIFED_THREADS when set.
std::size_t default_thread_count();

}  // namespace semifed
