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
#include "semifed/params.hpp"
#include "semifed/rng.hpp"
#include "semifed/sfds.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

using namespace semifed;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(std::string const &name)
{
  auto dir = fs::temp_directory_path() / "semifed_tests";
  fs::create_directories(dir);
  return dir / name;
}

Dataset image_dataset(std::size_t n, std::size_t classes, std::uint64_t seed)
{
  Rng     rng(seed);
  Dataset d;
  d.sample_shape = {3, 4, 4};
  d.num_classes  = classes;
  for (std::size_t i = 0; i < n; ++i)
  {
    Example e;
    e.id    = i;
    e.label = static_cast<int>(rng.below(classes));
    for (int p = 0; p < 48; ++p)
    {
      e.features.push_back(static_cast<float>(rng.below(256)) / 255.0F);
    }
    d.examples.push_back(e);
  }
  return d;
}

// (id, label) multiset of every example across clients, with hidden labels restored
std::vector<std::pair<std::uint64_t, int>> flatten(Partition const &p)
{
  std::vector<std::pair<std::uint64_t, int>> out;
  for (auto const &c : p.clients)
  {
    for (auto const &e : c.labeled)
    {
      out.emplace_back(e.id, e.label);
    }
    for (auto const &e : c.unlabeled)
    {
      out.emplace_back(e.id, *p.hidden.label_of(e.id));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<std::uint64_t, int>> flatten(Dataset const &d)
{
  std::vector<std::pair<std::uint64_t, int>> out;
  for (auto const &e : d.examples)
  {
    out.emplace_back(e.id, e.label);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Params, SerializeRoundTrip)
{
  Rng         rng(1);
  auto        draw = [&](std::size_t n) {
    std::vector<float> v(n);
    for (auto &x : v)
    {
      x = static_cast<float>(rng.normal());
    }
    return v;
  };
  ModelParams p({ParamTensor{"a", {2, 3}, draw(6)}, ParamTensor{"layer.b", {4}, draw(4)}});
  auto bytes = serialize(p);
  EXPECT_EQ(bytes.size(), serialized_size(p));
  EXPECT_EQ(deserialize(bytes), p);
}

TEST(Params, WireLayout)
{
  ModelParams p({ParamTensor{"w", {1}, {1.0F}}});
  auto        bytes = serialize(p);
  std::vector<std::uint8_t> want{1, 0, 0, 0, 1, 0, 0, 0, 'w', 1, 0, 0, 0, 1, 0, 0, 0, 0x00, 0x00, 0x80, 0x3f};
  EXPECT_EQ(bytes, want);
}

TEST(Params, TruncatedPayload)
{
  ModelParams p({ParamTensor{"w", {2}, {1.0F, 2.0F}}});
  auto        bytes = serialize(p);
  bytes.pop_back();
  EXPECT_THROW(deserialize(bytes), ProtocolError);
  bytes = serialize(p);
  bytes.push_back(0);
  EXPECT_THROW(deserialize(bytes), ProtocolError);
}

TEST(Params, CheckpointFile)
{
  ModelParams p({ParamTensor{"w", {2}, {1.5F, -2.0F}}});
  auto const  path = temp_path("ckpt.bin").string();
  save_checkpoint(p, path);
  EXPECT_EQ(load_checkpoint(path), p);
}

TEST(Sfds, EmptyDataset)
{
  Dataset d;
  d.sample_shape = {1, 2, 2};
  d.num_classes  = 3;
  auto back      = decode_sfds(encode_sfds(d));
  EXPECT_TRUE(back.examples.empty());
  EXPECT_EQ(back.sample_shape, d.sample_shape);
  EXPECT_EQ(back.num_classes, 3U);
}

TEST(Sfds, FileRoundTrip)
{
  Dataset d                  = image_dataset(20, 5, 7);
  d.examples[3].label        = kUnlabeled;
  auto const path            = temp_path("rt.sfds").string();
  save_dataset(d, path);
  EXPECT_EQ(load_dataset(path).examples, d.examples);
}

TEST(Sfds, HeaderLayout)
{
  Dataset d = image_dataset(2, 10, 1);
  auto    b = encode_sfds(d);
  ASSERT_EQ(b.size(), 20U + 2U * (4U + 48U));
  EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "SFDS");
  EXPECT_EQ(b[4], 1);   // version
  EXPECT_EQ(b[8], 2);   // N
  EXPECT_EQ(b[12], 3);  // channels
  EXPECT_EQ(b[14], 4);  // height
  EXPECT_EQ(b[16], 4);  // width
  EXPECT_EQ(b[18], 10); // classes
}

TEST(Sfds, CifarSizedHeader)
{
  auto const path = temp_path("cifar_header.sfds");
  {
    std::vector<std::uint8_t> head{'S', 'F', 'D', 'S', 1, 0, 0, 0};
    std::uint32_t const       n = 50000;
    for (int i = 0; i < 4; ++i)
    {
      head.push_back(static_cast<std::uint8_t>(n >> (8 * i)));
    }
    for (std::uint16_t v : {3, 32, 32, 10})
    {
      head.push_back(static_cast<std::uint8_t>(v & 0xFF));
      head.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<char const *>(head.data()), static_cast<std::streamsize>(head.size()));
  }
  // zero records: labels 0, black images
  fs::resize_file(path, 20 + 50000ULL * (4 + 3072));
  auto h = inspect_dataset(path.string());
  EXPECT_EQ(h.count, 50000U);
  EXPECT_EQ(h.sample_shape, (Shape{3, 32, 32}));
  EXPECT_EQ(h.num_classes, 10U);
  fs::remove(path);
}

TEST(Sfds, BadMagicReportsOffset)
{
  auto b = encode_sfds(image_dataset(1, 2, 1));
  b[2]   = 'X';
  try
  {
    decode_sfds(b);
    FAIL();
  }
  catch (FormatError const &e)
  {
    EXPECT_EQ(e.offset(), 0U);
  }
}

TEST(Sfds, TruncatedRecord)
{
  auto b = encode_sfds(image_dataset(3, 2, 1));
  b.resize(b.size() - 10);
  try
  {
    decode_sfds(b);
    FAIL();
  }
  catch (FormatError const &e)
  {
    EXPECT_EQ(e.offset(), 20U + 2U * 52U);
  }
}

TEST(Sfds, LabelOutOfRange)
{
  auto b         = encode_sfds(image_dataset(3, 2, 1));
  std::size_t at = 20 + 52;  // second record's label
  b[at]          = 2;
  b[at + 1] = b[at + 2] = b[at + 3] = 0;
  try
  {
    decode_sfds(b);
    FAIL();
  }
  catch (FormatError const &e)
  {
    EXPECT_EQ(e.offset(), at);
  }
}

TEST(Sfds, QuantizesOnWrite)
{
  Dataset d;
  d.sample_shape = {1, 1, 2};
  d.num_classes  = 2;
  d.examples.push_back({0, {0.5F, 1.7F}, 1});
  auto back = decode_sfds(encode_sfds(d));
  EXPECT_EQ(back.examples[0].features[0], 128.0F / 255.0F);
  EXPECT_EQ(back.examples[0].features[1], 1.0F);
}

TEST(Blobs, Deterministic)
{
  EXPECT_EQ(make_synthetic_blobs(100, 3, 2, 4.0, 5).examples, make_synthetic_blobs(100, 3, 2, 4.0, 5).examples);
}

TEST(Blobs, BalancedClasses)
{
  auto d = make_synthetic_blobs(103, 4, 3, 2.0, 1);
  auto c = d.class_counts();
  EXPECT_EQ(c, (std::vector<std::size_t>{26, 26, 26, 25}));
}

TEST(Blobs, ZeroSeparationSameDistribution)
{
  auto   d = make_synthetic_blobs(40000, 2, 2, 0.0, 3);
  double m[2][2]{};
  for (auto const &e : d.examples)
  {
    m[e.label][0] += e.features[0] / 20000.0;
    m[e.label][1] += e.features[1] / 20000.0;
  }
  EXPECT_NEAR(m[0][0], m[1][0], 0.05);
  EXPECT_NEAR(m[0][1], m[1][1], 0.05);
}

TEST(Blobs, NeighbourCentersAreSeparationApart)
{
  for (std::size_t classes : {2U, 4U, 6U})
  {
    auto                             d = make_synthetic_blobs(60000, classes, 2, 5.0, 8);
    std::vector<std::vector<double>> centers(classes, std::vector<double>(2, 0.0));
    for (auto const &e : d.examples)
    {
      centers[e.label][0] += e.features[0];
      centers[e.label][1] += e.features[1];
    }
    double const per = 60000.0 / static_cast<double>(classes);
    for (std::size_t c = 0; c < classes; ++c)
    {
      std::size_t const next = (c + 1) % classes;
      if (classes == 2 && c == 1)
      {
        break;
      }
      double const dx = (centers[c][0] - centers[next][0]) / per;
      double const dy = (centers[c][1] - centers[next][1]) / per;
      EXPECT_NEAR(std::hypot(dx, dy), 5.0, 0.1) << classes;
    }
  }
}

// logistic regression by plain gradient descent
TEST(Blobs, SeparableAtSixSigma)
{
  auto   train = make_synthetic_blobs(2000, 2, 2, 6.0, 1);
  auto   test  = make_synthetic_blobs(2000, 2, 2, 6.0, 2);
  double w0 = 0, w1 = 0, b = 0;
  for (int it = 0; it < 300; ++it)
  {
    double g0 = 0, g1 = 0, gb = 0;
    for (auto const &e : train.examples)
    {
      double const z = w0 * e.features[0] + w1 * e.features[1] + b;
      double const p = 1.0 / (1.0 + std::exp(-z));
      double const r = p - e.label;
      g0 += r * e.features[0];
      g1 += r * e.features[1];
      gb += r;
    }
    w0 -= 0.5 * g0 / 2000.0;
    w1 -= 0.5 * g1 / 2000.0;
    b -= 0.5 * gb / 2000.0;
  }
  int correct = 0;
  for (auto const &e : test.examples)
  {
    double const z = w0 * e.features[0] + w1 * e.features[1] + b;
    correct += (z > 0) == (e.label == 1);
  }
  EXPECT_GT(correct / 2000.0, 0.99);
}

TEST(Split, AllLabeled)
{
  auto d = make_synthetic_blobs(50, 5, 2, 1.0, 1);
  auto s = split_labeled(d, 50, 3);
  EXPECT_EQ(s.labeled.size(), 50U);
  EXPECT_TRUE(s.unlabeled.empty());
}

TEST(Split, HundredPerClass)
{
  auto d = make_synthetic_blobs(5000, 10, 2, 1.0, 1);
  auto s = split_labeled(d, 1000, 3);
  Dataset l{d.sample_shape, 10, s.labeled};
  EXPECT_EQ(l.class_counts(), std::vector<std::size_t>(10, 100));
}

TEST(Split, RemainderInClassOrder)
{
  auto    d = make_synthetic_blobs(400, 4, 2, 1.0, 1);
  auto    s = split_labeled(d, 10, 3);
  Dataset l{d.sample_shape, 4, s.labeled};
  EXPECT_EQ(l.class_counts(), (std::vector<std::size_t>{3, 3, 2, 2}));
}

TEST(Split, HiddenLabelsNotVisible)
{
  auto d = make_synthetic_blobs(200, 4, 2, 1.0, 1);
  auto s = split_labeled(d, 20, 3);
  EXPECT_EQ(s.hidden.size(), 180U);
  for (auto const &e : s.unlabeled)
  {
    EXPECT_EQ(e.label, kUnlabeled);
    EXPECT_EQ(s.hidden.label_of(e.id), d.examples[e.id].label);
  }
}

TEST(Split, TooMany)
{
  auto d = make_synthetic_blobs(20, 2, 2, 1.0, 1);
  EXPECT_THROW(split_labeled(d, 21, 0), SpecError);
}

TEST(Partition, SingleClientGetsAll)
{
  auto          d = make_synthetic_blobs(300, 3, 2, 1.0, 1);
  PartitionSpec spec{PartitionMode::Dirichlet, 0.5, 1, 30, 4, false};
  auto          p = partition(d, spec);
  ASSERT_EQ(p.clients.size(), 1U);
  EXPECT_EQ(p.clients[0].labeled.size(), 30U);
  EXPECT_EQ(p.clients[0].unlabeled.size(), 270U);
}

TEST(Partition, ConservesEverything)
{
  auto d = make_synthetic_blobs(1000, 5, 2, 1.0, 1);
  for (auto mode : {PartitionMode::Dirichlet, PartitionMode::Iid})
  {
    PartitionSpec spec{mode, 0.3, 7, 50, 9, false};
    auto          p = partition(d, spec);
    EXPECT_EQ(flatten(p), flatten(d));
  }
}

TEST(Partition, ZeroClients)
{
  auto d = make_synthetic_blobs(10, 2, 2, 1.0, 1);
  EXPECT_THROW(partition(d, PartitionSpec{PartitionMode::Iid, 0.5, 0, 2, 0, false}), SpecError);
}

TEST(Partition, Deterministic)
{
  auto          d = make_synthetic_blobs(500, 4, 2, 1.0, 1);
  PartitionSpec spec{PartitionMode::Dirichlet, 0.5, 5, 40, 3, false};
  auto          a = partition(d, spec);
  auto          b = partition(d, spec);
  for (std::size_t k = 0; k < 5; ++k)
  {
    EXPECT_EQ(a.clients[k].labeled, b.clients[k].labeled);
    EXPECT_EQ(a.clients[k].unlabeled, b.clients[k].unlabeled);
  }
}

TEST(Partition, IidWithinOnePerClass)
{
  auto          d = make_synthetic_blobs(1003, 4, 2, 1.0, 1);
  PartitionSpec spec{PartitionMode::Iid, 0.5, 6, 0, 3, false};
  auto          p = partition(d, spec);
  auto          n = d.class_counts();
  for (auto const &c : p.clients)
  {
    std::vector<std::size_t> counts(4, 0);
    for (auto const &e : c.unlabeled)
    {
      ++counts[*p.hidden.label_of(e.id)];
    }
    for (std::size_t cl = 0; cl < 4; ++cl)
    {
      double const share = static_cast<double>(n[cl]) / 6.0;
      EXPECT_LE(std::abs(static_cast<double>(counts[cl]) - share), 1.0);
    }
  }
}

TEST(Partition, SharedDrawKeepsPoolsAlike)
{
  auto          d = make_synthetic_blobs(4000, 4, 2, 1.0, 1);
  PartitionSpec spec{PartitionMode::Dirichlet, 0.5, 5, 400, 12, false};
  auto          p = partition(d, spec);
  for (auto const &c : p.clients)
  {
    std::vector<double> lab(4, 0), unl(4, 0);
    for (auto const &e : c.labeled)
    {
      lab[e.label] += 1.0 / 100.0;
    }
    for (auto const &e : c.unlabeled)
    {
      unl[*p.hidden.label_of(e.id)] += 1.0 / 900.0;
    }
    for (int cl = 0; cl < 4; ++cl)
    {
      EXPECT_NEAR(lab[cl], unl[cl], 0.011);
    }
  }
}

TEST(Partition, ZeroLabeledClientWarns)
{
  auto          d = make_synthetic_blobs(200, 2, 2, 1.0, 1);
  PartitionSpec spec{PartitionMode::Iid, 0.5, 5, 2, 0, false};
  auto          p = partition(d, spec);
  EXPECT_EQ(p.warnings.size(), 3U);
}

TEST(Partition, HighAlphaNearUniform)
{
  Dataset d;
  d.sample_shape = {1};
  d.num_classes  = 3;
  for (std::uint64_t i = 0; i < 3000; ++i)
  {
    d.examples.push_back({i, {0.0F}, static_cast<int>(i % 3)});
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed)
  {
    auto p = partition(d, PartitionSpec{PartitionMode::Dirichlet, 1000.0, 10, 0, seed, false});
    for (auto const &c : p.clients)
    {
      std::vector<int> counts(3, 0);
      for (auto const &e : c.unlabeled)
      {
        ++counts[*p.hidden.label_of(e.id)];
      }
      for (int n : counts)
      {
        EXPECT_GE(n, 85);
        EXPECT_LE(n, 115);
      }
    }
  }
}

TEST(LargestRemainder, SumsToTotal)
{
  EXPECT_EQ(largest_remainder({1, 1, 1}, 10), (std::vector<std::size_t>{4, 3, 3}));
  EXPECT_EQ(largest_remainder({0.5, 0.25, 0.25}, 3), (std::vector<std::size_t>{1, 1, 1}));
  EXPECT_EQ(largest_remainder({0.0, 2.0}, 5), (std::vector<std::size_t>{0, 5}));
  EXPECT_THROW(largest_remainder({0.0, 0.0}, 5), ContractError);
}

TEST(Holdout, RemovesFromTrain)
{
  auto d  = make_synthetic_blobs(100, 2, 2, 1.0, 1);
  auto ho = take_holdout(d, 30, 4);
  EXPECT_EQ(d.size(), 70U);
  EXPECT_EQ(ho.size(), 30U);
  std::vector<std::uint64_t> ids;
  for (auto const &e : d.examples)
  {
    ids.push_back(e.id);
  }
  for (auto const &e : ho.examples)
  {
    ids.push_back(e.id);
  }
  std::sort(ids.begin(), ids.end());
  EXPECT_EQ(std::unique(ids.begin(), ids.end()), ids.end());
  EXPECT_EQ(ids.size(), 100U);
}
