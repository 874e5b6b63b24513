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

#include "semifed/flcore.hpp"

#include "semifed/error.hpp"
#include "semifed/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace semifed {

double RoundPlan::gamma_at(std::size_t t) const
{
  auto it = gamma.find(t);
  if (it == gamma.end())
  {
    throw ContractError("no confidence threshold configured for pseudo round " + std::to_string(t));
  }
  return it->second;
}

std::vector<std::string> RoundPlan::problems(std::size_t clients) const
{
  std::vector<std::string> out;
  for (auto t : pseudo_rounds)
  {
    if (t >= rounds)
    {
      out.push_back("pseudo round " + std::to_string(t) + " is outside [0, " +
                    std::to_string(rounds) + ")");
    }
    if (gamma.count(t) == 0)
    {
      out.push_back("pseudo round " + std::to_string(t) + " has no confidence threshold");
    }
  }
  for (auto const &[t, g] : gamma)
  {
    if (!(g > 0.0 && g <= 1.0))
    {
      out.push_back("confidence threshold for round " + std::to_string(t) + " must lie in (0, 1]");
    }
  }
  if (!pseudo_rounds.empty() && (agreement == 0 || agreement > clients + 1))
  {
    out.push_back("agreement u must lie in [1, K+1] = [1, " + std::to_string(clients + 1) + "]");
  }
  if (batch_labeled == 0 || batch_unlabeled == 0)
  {
    out.push_back("batch sizes must be positive");
  }
  if (!(sgd.learning_rate >= 0.0F))
  {
    out.push_back("learning rate must be nonnegative");
  }
  if (!(sgd.momentum >= 0.0F && sgd.momentum < 1.0F))
  {
    out.push_back("momentum must lie in [0, 1)");
  }
  if (!(sgd.l2_coeff >= 0.0F))
  {
    out.push_back("l2 coefficient must be nonnegative");
  }
  if (!(lambda_u >= 0.0) || !std::isfinite(lambda_u))
  {
    out.push_back("lambda_u must be a finite nonnegative number");
  }
  if (!(noise_sigma >= 0.0))
  {
    out.push_back("noise sigma must be nonnegative");
  }
  if (augment.n_ops == 0 || augment.magnitude < 1 || augment.magnitude > 10)
  {
    out.push_back("augment policy needs n_ops >= 1 and magnitude in [1, 10]");
  }
  return out;
}

std::uint64_t client_round_seed(std::uint64_t global_seed, std::uint64_t seed_key, std::size_t round)
{
  return derive_seed(global_seed, seed_key, round, 0x5eedULL);
}

namespace {

// Walks a shuffled permutation of [0, n) in fixed-size batches, redrawing it when it runs short.
class CyclicSampler
{
public:
  CyclicSampler(std::size_t n, std::size_t batch, Rng &rng)
    : order_(n)
    , batch_(std::min(batch, n))
    , rng_(rng)
  {
    std::iota(order_.begin(), order_.end(), 0);
    if (n > 0)
    {
      reshuffle();
    }
  }

  std::vector<std::size_t> next()
  {
    if (cursor_ + batch_ > order_.size())
    {
      reshuffle();
    }
    std::vector<std::size_t> out(order_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                                 order_.begin() + static_cast<std::ptrdiff_t>(cursor_ + batch_));
    cursor_ += batch_;
    return out;
  }

private:
  void reshuffle()
  {
    std::iota(order_.begin(), order_.end(), 0);
    rng_.shuffle(order_);
    cursor_ = 0;
  }

  std::vector<std::size_t> order_;
  std::size_t              batch_;
  std::size_t              cursor_{0};
  Rng                     &rng_;
};

Tensor gather(ClassifierSpec const &spec, std::vector<Example> const &pool,
              std::vector<std::size_t>::const_iterator first, std::vector<std::size_t>::const_iterator last)
{
  std::vector<std::vector<float> const *> samples;
  for (auto it = first; it != last; ++it)
  {
    samples.push_back(&pool[*it].features);
  }
  return make_batch(spec, samples);
}

std::size_t ceil_div(std::size_t a, std::size_t b)
{
  return (a + b - 1) / b;
}

}  // namespace

LocalTrainingReport client_local_training(ClassifierSpec const &spec, ClientDataset const &data,
                                          ModelParams const &start, RoundPlan const &plan,
                                          std::uint64_t round_seed)
{
  LocalTrainingReport report;
  report.params = start;
  std::size_t const n_l = data.labeled.size();
  std::size_t const n_u = data.unlabeled.size();
  if (n_l == 0 && n_u == 0)
  {
    report.warning = "client holds no data; parameters unchanged";
    return report;
  }
  if (plan.epochs == 0)
  {
    return report;
  }

  Rng        sample_rng(derive_seed(round_seed, 0));
  Rng        augment_rng(derive_seed(round_seed, 1));
  OptimState optim = make_optim_state(start, plan.sgd);

  Perturbation const perturb = [&](Tensor const &batch) {
    return perturb_batch(batch, plan.augment, plan.noise_sigma, augment_rng);
  };

  std::size_t const iterations =
      n_u > 0 ? ceil_div(n_u, plan.batch_unlabeled) : ceil_div(n_l, plan.batch_labeled);
  CyclicSampler            labeled_sampler(n_l, plan.batch_labeled, sample_rng);
  std::vector<std::size_t> unlabeled_order(n_u);
  double                   sum_ls = 0.0;
  double                   sum_lu = 0.0;
  std::size_t              n_ls   = 0;
  std::size_t              n_lu   = 0;

  for (std::size_t epoch = 0; epoch < plan.epochs; ++epoch)
  {
    std::iota(unlabeled_order.begin(), unlabeled_order.end(), 0);
    sample_rng.shuffle(unlabeled_order);
    for (std::size_t it = 0; it < iterations; ++it)
    {
      std::optional<LabeledBatch> labeled;
      if (n_l > 0)
      {
        auto const idx = labeled_sampler.next();
        Tensor     x   = gather(spec, data.labeled, idx.begin(), idx.end());
        if (plan.weak_augment_labeled)
        {
          x = weak_augment_batch(x, augment_rng);
        }
        std::vector<std::size_t> y;
        y.reserve(idx.size());
        for (auto i : idx)
        {
          y.push_back(static_cast<std::size_t>(data.labeled[i].label));
        }
        labeled = LabeledBatch{std::move(x), std::move(y)};
      }
      std::optional<Tensor> unlabeled;
      if (n_u > 0)
      {
        std::size_t const lo = it * plan.batch_unlabeled;
        std::size_t const hi = std::min(n_u, lo + plan.batch_unlabeled);
        unlabeled = gather(spec, data.unlabeled, unlabeled_order.begin() + static_cast<std::ptrdiff_t>(lo),
                           unlabeled_order.begin() + static_cast<std::ptrdiff_t>(hi));
      }

      StepResult step = combined_step(spec, report.params, labeled ? &*labeled : nullptr,
                                      unlabeled ? &*unlabeled : nullptr, plan.lambda_u, perturb,
                                      optim, plan.consistency);
      report.params = std::move(step.params);
      if (step.losses.l_s)
      {
        sum_ls += *step.losses.l_s;
        ++n_ls;
        report.labeled_seen += labeled->labels.size();
        report.labeled_correct += step.labeled_correct;
      }
      if (step.losses.l_u)
      {
        sum_lu += *step.losses.l_u;
        ++n_lu;
      }
      if (step.losses.l_s || step.losses.l_u)
      {
        ++report.steps;
      }
    }
  }
  if (n_ls > 0)
  {
    report.l_s = sum_ls / static_cast<double>(n_ls);
  }
  if (n_lu > 0)
  {
    report.l_u = sum_lu / static_cast<double>(n_lu);
  }
  return report;
}

ModelParams fedavg(std::vector<ModelParams const *> const &models)
{
  if (models.empty())
  {
    throw ContractError("fedavg: no models to aggregate");
  }
  ModelParams const &first = *models.front();
  for (auto const *m : models)
  {
    if (!m->same_layout(first))
    {
      throw ContractError("fedavg: models have different layouts");
    }
  }
  auto const  k   = static_cast<double>(models.size());
  ModelParams out = first;
  for (std::size_t t = 0; t < out.size(); ++t)
  {
    auto &dst = out[t].values;
    for (std::size_t j = 0; j < dst.size(); ++j)
    {
      double total = 0.0;
      for (auto const *m : models)
      {
        total += static_cast<double>((*m)[t].values[j]);
      }
      dst[j] = static_cast<float>(total / k);
    }
  }
  return out;
}

ModelParams transmit(ModelParams const &params)
{
  auto const  bytes    = serialize(params);
  ModelParams received = deserialize(bytes);
  if (!(received == params))
  {
    throw ProtocolError("model payload did not survive the wire round trip");
  }
  return received;
}

std::vector<std::uint64_t> broadcast_models(ServerState const &server, std::vector<ClientState> &clients,
                                            std::size_t /*round*/, bool pseudo_round)
{
  std::vector<std::uint64_t> received(clients.size(), 0);
  if (pseudo_round && server.model_dict.size() != clients.size())
  {
    throw ContractError("broadcast: model dictionary holds " + std::to_string(server.model_dict.size()) +
                        " models for " + std::to_string(clients.size()) + " clients");
  }
  std::uint64_t const global_bytes = serialized_size(server.global);
  for (std::size_t k = 0; k < clients.size(); ++k)
  {
    auto &client = clients[k];
    client.received_models.clear();
    if (pseudo_round)
    {
      for (auto const &[id, model] : server.model_dict)
      {
        client.received_models.push_back(transmit(model));
        received[k] += serialized_size(model);
      }
      client.params = transmit(server.global);
      client.received_models.push_back(client.params);
    }
    else
    {
      client.params = transmit(server.global);
    }
    received[k] += global_bytes;
  }
  return received;
}

void parallel_for(std::size_t n, std::size_t threads, std::function<void(std::size_t)> const &fn)
{
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1)
  {
    for (std::size_t i = 0; i < n; ++i)
    {
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr       error;
  std::mutex               error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t)
  {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++)
      {
        try
        {
          fn(i);
        }
        catch (...)
        {
          std::lock_guard lock(error_mutex);
          if (!error)
          {
            error = std::current_exception();
          }
        }
      }
    });
  }
  for (auto &th : pool)
  {
    th.join();
  }
  if (error)
  {
    std::rethrow_exception(error);
  }
}

std::size_t default_thread_count()
{
  std::size_t n = std::max(1U, std::thread::hardware_concurrency());
  if (char const *cap = std::getenv("SEMIFED_THREADS"))
  {
    char         *end   = nullptr;
    long const    value = std::strtol(cap, &end, 10);
    if (end != cap && value > 0)
    {
      n = std::min(n, static_cast<std::size_t>(value));
    }
  }
  return n;
}

namespace {

void for_each_client(std::size_t n, RoundContext const &ctx, std::function<void(std::size_t)> const &fn)
{
  switch (ctx.order)
  {
  case ExecutionOrder::Sequential:
    for (std::size_t i = 0; i < n; ++i)
    {
      fn(i);
    }
    break;
  case ExecutionOrder::Reversed:
    for (std::size_t i = n; i-- > 0;)
    {
      fn(i);
    }
    break;
  case ExecutionOrder::Parallel:
    parallel_for(n, ctx.threads, fn);
    break;
  }
}

}  // namespace

std::vector<MetricsRecord> run_round(ServerState &server, std::vector<ClientState> &clients,
                                     RoundContext const &ctx)
{
  std::size_t const K = clients.size();
  if (K == 0)
  {
    throw ContractError("run_round: no clients");
  }
  for (std::size_t k = 0; k < K; ++k)
  {
    if (clients[k].data.client_id != k)
    {
      throw ContractError("run_round: clients must be ordered by id");
    }
  }
  std::size_t const t      = server.round;
  bool const        pseudo = ctx.plan.is_pseudo_round(t);

  std::vector<LocalTrainingReport> reports(K);
  for_each_client(K, ctx, [&](std::size_t k) {
    auto const &c = clients[k];
    reports[k]    = client_local_training(ctx.spec, c.data, c.params, ctx.plan,
                                          client_round_seed(ctx.seed, c.seed_key, t));
  });

  // upload
  ServerState next = server;
  next.model_dict.clear();
  std::vector<std::uint64_t> uplink(K);
  for (std::size_t k = 0; k < K; ++k)
  {
    uplink[k] = serialized_size(reports[k].params);
    next.model_dict.emplace(k, transmit(reports[k].params));
  }
  std::vector<ModelParams const *> ordered;
  for (auto const &[id, model] : next.model_dict)
  {
    ordered.push_back(&model);
  }
  next.global = fedavg(ordered);
  next.round  = t + 1;

  std::vector<std::uint64_t> downlink = broadcast_models(next, clients, t, pseudo);

  std::vector<PseudoLabelStats> pseudo_stats(K);
  if (pseudo)
  {
    PseudoLabelRule const rule{ctx.plan.gamma_at(t), ctx.plan.agreement, ctx.plan.cap};
    for_each_client(K, ctx, [&](std::size_t k) {
      pseudo_stats[k] = pseudo_label_client(clients[k].data, ctx.spec, clients[k].received_models,
                                            rule, ctx.hidden);
    });
  }
  server = std::move(next);

  std::vector<MetricsRecord> records;
  MetricsRecord              total;
  total.round = server.round;
  double      ls_sum = 0.0;
  double      lu_sum = 0.0;
  std::size_t ls_n = 0, lu_n = 0, seen = 0, correct = 0, pseudo_correct = 0;
  for (std::size_t k = 0; k < K; ++k)
  {
    auto const   &rep = reports[k];
    MetricsRecord r;
    r.round     = server.round;
    r.client_id = k;
    r.l_s       = rep.l_s;
    r.l_u       = rep.l_u;
    if (rep.labeled_seen > 0)
    {
      r.train_acc = static_cast<double>(rep.labeled_correct) / static_cast<double>(rep.labeled_seen);
    }
    r.n_pseudo_new     = pseudo_stats[k].moved;
    r.pseudo_precision = pseudo_stats[k].precision;
    r.bytes_up         = uplink[k];
    r.bytes_down       = downlink[k];
    r.warning          = rep.warning;
    records.push_back(r);

    if (rep.l_s)
    {
      ls_sum += *rep.l_s;
      ++ls_n;
    }
    if (rep.l_u)
    {
      lu_sum += *rep.l_u;
      ++lu_n;
    }
    seen += rep.labeled_seen;
    correct += rep.labeled_correct;
    total.n_pseudo_new += r.n_pseudo_new;
    if (r.pseudo_precision)
    {
      pseudo_correct += static_cast<std::size_t>(std::lround(*r.pseudo_precision * static_cast<double>(r.n_pseudo_new)));
    }
    total.bytes_up += r.bytes_up;
    total.bytes_down += r.bytes_down;
  }
  if (ls_n > 0)
  {
    total.l_s = ls_sum / static_cast<double>(ls_n);
  }
  if (lu_n > 0)
  {
    total.l_u = lu_sum / static_cast<double>(lu_n);
  }
  if (seen > 0)
  {
    total.train_acc = static_cast<double>(correct) / static_cast<double>(seen);
  }
  if (total.n_pseudo_new > 0 && ctx.hidden != nullptr)
  {
    total.pseudo_precision = static_cast<double>(pseudo_correct) / static_cast<double>(total.n_pseudo_new);
  }
  records.push_back(total);
  return records;
}

}  // namespace semifed
