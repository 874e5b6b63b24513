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

#include "vote_oracle.hpp"

#include "semifed/error.hpp"
#include "semifed/model.hpp"
#include "semifed/pseudolabel.hpp"

#include <gtest/gtest.h>

#include <map>
#include <set>

using namespace semifed;
using semifed::testing::brute_force_select;
using semifed::testing::random_panel;

namespace {

std::vector<Vote> votes(std::vector<std::optional<std::size_t>> const &labels)
{
  std::vector<Vote> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
  {
    out.push_back({i, labels[i], labels[i] ? 0.99 : 0.4});
  }
  return out;
}

// Every model predicts the same one-hot-ish row per sample.
PredictionPanel agreeing_panel(std::size_t models, std::size_t n, std::size_t classes)
{
  PredictionPanel panel;
  std::vector<double> values;
  for (std::size_t i = 0; i < n; ++i)
  {
    panel.sample_ids.push_back(i);
    for (std::size_t c = 0; c < classes; ++c)
    {
      double const top = 0.96 + 0.03 * static_cast<double>(i % 7) / 7.0;
      values.push_back(c == i % classes ? top : (1.0 - top) / static_cast<double>(classes - 1));
    }
  }
  for (std::size_t m = 0; m < models; ++m)
  {
    panel.per_model.emplace_back(Shape{n, classes}, values);
  }
  return panel;
}

}  // namespace

TEST(ConfidentPrediction, AboveThreshold)
{
  std::vector<double> p{0.99, 0.01};
  auto                v = confident_prediction(p, 0.98);
  ASSERT_TRUE(v.label.has_value());
  EXPECT_EQ(*v.label, 0U);
  EXPECT_EQ(v.confidence, 0.99);
}

TEST(ConfidentPrediction, BelowThresholdAbstains)
{
  std::vector<double> p{0.6, 0.4};
  EXPECT_FALSE(confident_prediction(p, 0.98).label.has_value());
}

TEST(ConfidentPrediction, ExactThresholdCounts)
{
  std::vector<double> p{0.25, 0.75};
  EXPECT_EQ(confident_prediction(p, 0.75).label, 1U);
}

TEST(ConfidentPrediction, TieGoesToLowestClass)
{
  std::vector<double> p{0.2, 0.4, 0.4};
  EXPECT_EQ(confident_prediction(p, 0.3).label, 1U);
}

TEST(ConfidentPrediction, ModelOverload)
{
  auto spec   = ClassifierSpec::mlp({2, 3, 2});
  auto params = init_model(spec, 0);
  for (auto &t : params.tensors())
  {
    std::fill(t.values.begin(), t.values.end(), 0.0F);
  }
  EXPECT_FALSE(confident_prediction(spec, params, Tensor::vector({1, 1}), 0.98).label);
  EXPECT_EQ(confident_prediction(spec, params, Tensor::vector({1, 1}), 0.5).label, 0U);
}

TEST(Tally, Unanimous)
{
  std::vector<std::optional<std::size_t>> l(11, 3);
  auto                                    t = tally_votes(7, votes(l), 5);
  EXPECT_EQ(t.s_x, 11U);
  EXPECT_EQ(t.winner, 3U);
  EXPECT_EQ(t.sample_id, 7U);
}

TEST(Tally, AllAbstain)
{
  std::vector<std::optional<std::size_t>> l(11);
  auto                                    t = tally_votes(0, votes(l), 5);
  EXPECT_EQ(t.s_x, 0U);
  EXPECT_FALSE(t.winner.has_value());
}

TEST(Tally, MixedWithAbstentions)
{
  std::vector<std::optional<std::size_t>> l{1, 1, 1, 1, 1, 2, 2, 2, 2, std::nullopt, std::nullopt};
  auto                                    t = tally_votes(0, votes(l), 3);
  EXPECT_EQ(t.s_x, 5U);
  EXPECT_EQ(t.winner, 1U);
  EXPECT_EQ(t.counts, (std::vector<std::size_t>{0, 5, 4}));
}

TEST(Tally, TieHasNoWinner)
{
  std::vector<std::optional<std::size_t>> l{0, 0, 2, 2, std::nullopt};
  auto                                    t = tally_votes(0, votes(l), 3);
  EXPECT_EQ(t.s_x, 2U);
  EXPECT_FALSE(t.winner.has_value());
}

TEST(Tally, MeanConfidenceOfWinners)
{
  std::vector<Vote> v{{0, 1, 0.9}, {1, 1, 0.96}, {2, 0, 0.99}};
  EXPECT_NEAR(tally_votes(0, v, 2).mean_conf, 0.93, 1e-15);
}

TEST(Select, UnsatisfiableAgreement)
{
  auto panel = agreeing_panel(11, 30, 3);
  EXPECT_TRUE(select_pseudo_labels(panel, {0.5, 12, 1000}).empty());
}

TEST(Select, CapKeepsMostConfident)
{
  auto panel = agreeing_panel(11, 1500, 4);
  auto all   = rank_candidates(panel, {0.95, 11, 1000});
  EXPECT_EQ(all.size(), 1500U);
  auto kept = select_pseudo_labels(panel, {0.95, 11, 1000});
  ASSERT_EQ(kept.size(), 1000U);
  EXPECT_TRUE(std::equal(kept.begin(), kept.end(), all.begin()));
  for (std::size_t i = 1; i < kept.size(); ++i)
  {
    EXPECT_TRUE(kept[i - 1].mean_conf > kept[i].mean_conf ||
                (kept[i - 1].mean_conf == kept[i].mean_conf && kept[i - 1].sample_id < kept[i].sample_id));
  }
}

TEST(Select, MatchesBruteForceOracle)
{
  Rng rng(31337);
  for (int trial = 0; trial < 50; ++trial)
  {
    std::size_t const models  = 2 + rng.below(11);
    std::size_t const classes = 2 + rng.below(5);
    auto              panel   = random_panel(rng, models, 40 + rng.below(40), classes);
    double const      gamma   = 0.3 + 0.69 * rng.uniform();
    std::size_t const u       = 1 + rng.below(models + 1);
    std::size_t const cap     = rng.below(60);
    EXPECT_EQ(select_pseudo_labels(panel, {gamma, u, cap}), brute_force_select(panel, gamma, u, cap))
        << "trial " << trial;
  }
}

TEST(PseudoLabelClient, MovesAndConserves)
{
  auto          spec = ClassifierSpec::mlp({2, 2});
  ModelParams   confident({ParamTensor{"fc0.weight", {2, 2}, {10.0F, -10.0F, -10.0F, 10.0F}},
                           ParamTensor{"fc0.bias", {2}, {0.0F, 0.0F}}});
  ClientDataset client;
  GroundTruth   hidden;
  for (std::uint64_t i = 0; i < 6; ++i)
  {
    float const sgn = i % 2 == 0 ? 1.0F : -1.0F;
    client.unlabeled.push_back({i, {sgn, -sgn}, kUnlabeled});
    hidden.record(i, i == 4 ? 1 : static_cast<int>(i % 2));
  }
  client.unlabeled.push_back({6, {0.0F, 0.0F}, kUnlabeled});  // 50/50: abstains
  hidden.record(6, 0);
  client.labeled.push_back({99, {1.0F, 0.0F}, 0});

  std::vector<ModelParams> models(3, confident);
  auto stats = pseudo_label_client(client, spec, models, {0.95, 3, 4}, &hidden);
  EXPECT_EQ(stats.candidates, 6U);
  EXPECT_EQ(stats.moved, 4U);
  EXPECT_EQ(client.labeled.size() + client.unlabeled.size(), 8U);
  EXPECT_EQ(client.unlabeled.size(), 3U);
  std::set<std::uint64_t> ids;
  for (auto const &e : client.labeled)
  {
    EXPECT_NE(e.label, kUnlabeled);
    EXPECT_TRUE(ids.insert(e.id).second);
  }
  // ties on mean_conf: ids 0..3 win; id 4's hidden label disagrees but it is not moved
  ASSERT_TRUE(stats.precision.has_value());
  EXPECT_EQ(*stats.precision, 1.0);
}

TEST(PseudoLabelClient, AgreementAboveModelCount)
{
  auto                     spec = ClassifierSpec::mlp({2, 2});
  std::vector<ModelParams> models(2, init_model(spec, 0));
  ClientDataset            client;
  client.unlabeled.push_back({1, {1.0F, 0.0F}, kUnlabeled});
  auto stats = pseudo_label_client(client, spec, models, {0.01, 3, 10}, nullptr);
  EXPECT_EQ(stats.moved, 0U);
  EXPECT_EQ(client.unlabeled.size(), 1U);
}

TEST(PseudoPrecision, AllCorrect)
{
  GroundTruth h;
  h.record(1, 0);
  h.record(2, 1);
  std::vector<Selection> s{{1, 0, 0.99}, {2, 1, 0.98}};
  EXPECT_EQ(pseudo_precision(s, h), 1.0);
}

TEST(PseudoPrecision, NothingMovedIsNull)
{
  GroundTruth h;
  EXPECT_FALSE(pseudo_precision({}, h).has_value());
}

TEST(PseudoPrecision, Fraction)
{
  GroundTruth h;
  h.record(1, 0);
  h.record(2, 0);
  std::vector<Selection> s{{1, 0, 0.99}, {2, 1, 0.98}};
  EXPECT_EQ(pseudo_precision(s, h), 0.5);
}

// With u above half the voters the winner is a strict majority, so tightening only removes.
TEST(Select, MonotoneInThresholdsForMajorityAgreement)
{
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial)
  {
    auto              panel = random_panel(rng, 7, 60, 3);
    double const      g     = 0.4 + 0.5 * rng.uniform();
    double const      g2    = g + (1.0 - g) * rng.uniform();
    std::size_t const u     = 4 + rng.below(4);
    std::size_t const u2    = u + rng.below(8 - u);
    auto const        loose = rank_candidates(panel, {g, u, 1000});
    auto const        tight = rank_candidates(panel, {g2, u2, 1000});
    std::map<std::uint64_t, std::size_t> loose_labels;
    for (auto const &s : loose)
    {
      loose_labels[s.sample_id] = s.label;
    }
    for (auto const &s : tight)
    {
      ASSERT_TRUE(loose_labels.count(s.sample_id)) << "trial " << trial;
      EXPECT_EQ(loose_labels[s.sample_id], s.label);
    }
  }
}

// A tie under the looser threshold disqualifies; the tighter one can break the tie.
TEST(Select, TieBrokenByTighterThreshold)
{
  PredictionPanel panel;
  panel.sample_ids = {5};
  for (double top : {0.9, 0.9, 0.9, 0.7})
  {
    std::size_t const cls = top == 0.7 || panel.per_model.size() == 2 ? 1 : 0;
    std::vector<double> row(2, 1.0 - top);
    row[cls] = top;
    panel.per_model.emplace_back(Shape{1, 2}, row);
  }
  // votes at gamma 0.6: class 0 twice, class 1 twice
  EXPECT_TRUE(rank_candidates(panel, {0.6, 2, 10}).empty());
  auto tight = rank_candidates(panel, {0.8, 2, 10});
  ASSERT_EQ(tight.size(), 1U);
  EXPECT_EQ(tight[0].label, 0U);
}
