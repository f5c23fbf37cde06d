// Copyright 2026 The pslabel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pslabel/nms.h"

#include <algorithm>
#include <map>
#include <tuple>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "oracles/oracles.h"
#include "pslabel/error.h"
#include "pslabel/random.h"

namespace pslabel {
namespace {

Detection Det(double x1, double y1, double x2, double y2, double score,
              std::int64_t cls = 0, std::int64_t image = 0) {
  return Detection{BBox(x1, y1, x2, y2), score, std::nullopt, cls, image};
}

NmsParams Params(double delta, double mu) {
  NmsParams p;
  p.iou_threshold = delta;
  p.score_threshold = mu;
  return p;
}

const Detection kA = Det(0, 0, 10, 10, 0.9);
const Detection kB = Det(1, 1, 11, 11, 0.8);
const Detection kC = Det(40, 40, 50, 50, 0.7);

TEST(ClusterUncertainty, IdenticalBoxesGiveZero) {
  const std::vector<BBox> c(5, BBox(0.1, 0.2, 10.3, 7.7));
  EXPECT_EQ(ClusterUncertainty(c), 0.0);
}

TEST(ClusterUncertainty, DiagonalShift) {
  // Every coordinate has population std 0.5; mean width = height = 10.
  const std::vector<BBox> c = {BBox(0, 0, 10, 10), BBox(1, 1, 11, 11)};
  EXPECT_NEAR(ClusterUncertainty(c), 0.05, 1e-15);
  const ClusterStats s = ComputeClusterStats(c);
  for (double sd : s.std_dev) EXPECT_DOUBLE_EQ(sd, 0.5);
  EXPECT_DOUBLE_EQ(s.mean_width, 10.0);
  EXPECT_DOUBLE_EQ(s.mean_height, 10.0);
  EXPECT_EQ(s.count, 2);
}

TEST(ClusterUncertainty, HorizontalShift) {
  // std_x1 = std_x2 = 1, std_y = 0, w = h = 10: (0.1 + 0 + 0.1 + 0) / 4.
  const std::vector<BBox> c = {BBox(0, 0, 10, 10), BBox(2, 0, 12, 10)};
  EXPECT_NEAR(ClusterUncertainty(c), 0.05, 1e-15);
  EXPECT_NEAR(oracle::DirectUncertainty(c), 0.05, 1e-15);
}

TEST(ClusterUncertainty, LiteralIndexingReadsY1Twice) {
  // Only y2 varies: the literal pairing never reads it.
  const std::vector<BBox> c = {BBox(0, 0, 10, 10), BBox(0, 0, 10, 12)};
  EXPECT_EQ(ClusterUncertainty(c, UncertaintyIndexing::kLiteralSum), 0.0);
  EXPECT_GT(ClusterUncertainty(c, UncertaintyIndexing::kCornerAxis), 0.0);
}

TEST(ClusterUncertainty, Errors) {
  const std::vector<BBox> one = {BBox(0, 0, 1, 1)};
  EXPECT_THROW(ClusterUncertainty(one), InvalidArgumentError);
  const std::vector<BBox> flat = {BBox(0, 0, 0, 5), BBox(1, 0, 1, 5)};
  EXPECT_THROW(ClusterUncertainty(flat), DegenerateClusterError);
}

TEST(ClusterUncertaintyProperty, ZeroOnlyForIdenticalClusters) {
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    std::vector<BBox> c = oracle::RandomCluster(rng, 8);
    ASSERT_GT(ClusterUncertainty(c), 0.0);
    std::fill(c.begin(), c.end(), c.front());
    ASSERT_EQ(ClusterUncertainty(c), 0.0);
  }
}

TEST(StandardNms, Examples) {
  EXPECT_TRUE(StandardNms({}, Params(0.6, 0.4)).empty());

  const std::vector<Detection> one = {Det(0, 0, 5, 5, 0.9)};
  EXPECT_EQ(StandardNms(one, Params(0.6, 0.4)), one);

  const std::vector<Detection> twins = {Det(0, 0, 5, 5, 0.8),
                                        Det(0, 0, 5, 5, 0.9)};
  const auto kept = StandardNms(twins, Params(0.6, 0.4));
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].score, 0.9);

  const std::vector<Detection> abc = {kA, kB, kC};
  EXPECT_EQ(StandardNms(abc, Params(0.6, 0.4)),
            (std::vector<Detection>{kA, kC}));
}

TEST(StandardNms, ScoreFilterIsInclusive) {
  const std::vector<Detection> dets = {Det(0, 0, 5, 5, 0.4),
                                       Det(10, 10, 15, 15, 0.39)};
  const auto kept = StandardNms(dets, Params(0.6, 0.4));
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].score, 0.4);
}

TEST(StandardNms, SuppressesPerClass) {
  const std::vector<Detection> dets = {Det(0, 0, 10, 10, 0.9, 0),
                                       Det(0, 0, 10, 10, 0.8, 1)};
  EXPECT_EQ(StandardNms(dets, Params(0.6, 0.0)).size(), 2u);
}

TEST(StandardNms, RejectsBadInput) {
  const std::vector<Detection> bad = {Det(0, 0, 1, 1, 1.5)};
  EXPECT_THROW(StandardNms(bad, Params(0.6, 0.4)), InvalidArgumentError);
  EXPECT_THROW(StandardNms({}, Params(0.0, 0.4)), InvalidArgumentError);
  EXPECT_THROW(StandardNms({}, Params(0.6, -0.1)), InvalidArgumentError);
}

TEST(NmsUnc, SingletonIsDropped) {
  NmsDiagnostics diag;
  const std::vector<Detection> one = {Det(0, 0, 10, 10, 0.9)};
  EXPECT_TRUE(NmsUnc(one, Params(0.6, 0.4), &diag).empty());
  EXPECT_EQ(diag.clusters, 1);
  EXPECT_EQ(diag.singleton_drops, 1);
}

TEST(NmsUnc, TwoBoxFixture) {
  const std::vector<Detection> ab = {kA, kB};
  const auto labels = NmsUnc(ab, Params(0.6, 0.4));
  ASSERT_EQ(labels.size(), 1u);
  EXPECT_EQ(labels[0].bbox, kA.bbox);
  EXPECT_EQ(labels[0].score, 0.9);
  EXPECT_NEAR(labels[0].uncertainty, 0.05, 1e-9);
  EXPECT_EQ(labels[0].cluster_size, 2);
}

TEST(NmsUnc, ThreeBoxFixture) {
  NmsDiagnostics diag;
  const std::vector<Detection> abc = {kA, kB, kC};
  const auto labels = NmsUnc(abc, Params(0.6, 0.4), &diag);
  ASSERT_EQ(labels.size(), 1u);
  EXPECT_EQ(labels[0].bbox, kA.bbox);
  EXPECT_EQ(diag.clusters, 2);
  EXPECT_EQ(diag.singleton_drops, 1);
}

TEST(NmsUnc, DegenerateClusterIsCounted) {
  NmsDiagnostics diag;
  // Zero-area boxes never reach IoU >= delta, so a degenerate cluster needs
  // positive-area members whose mean height is zero: impossible. Exercise the
  // path through identical zero-height pivots instead: each is a singleton.
  const std::vector<Detection> flat = {Det(0, 0, 10, 0, 0.9),
                                       Det(0, 0, 10, 0, 0.8)};
  EXPECT_TRUE(NmsUnc(flat, Params(0.6, 0.0), &diag).empty());
  EXPECT_EQ(diag.singleton_drops, 2);
  EXPECT_EQ(diag.degenerate_drops, 0);
}

TEST(NmsUnc, TieBreakIsDeterministic) {
  // Equal scores: the box with smaller x1 becomes the pivot regardless of
  // input order.
  const Detection left = Det(0, 0, 10, 10, 0.7);
  const Detection right = Det(1, 0, 11, 10, 0.7);
  const std::vector<Detection> lr = {left, right};
  const std::vector<Detection> rl = {right, left};
  const auto a = NmsUnc(lr, Params(0.6, 0.0));
  const auto b = NmsUnc(rl, Params(0.6, 0.0));
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].bbox, left.bbox);
  EXPECT_EQ(a, b);
}

// The spatial index kicks in above a few dozen boxes per group; compare both
// paths against the literal transcription on larger crowded groups.
TEST(NmsUncProperty, MatchesLiteralOracleOnLargeGroups) {
  Rng rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Detection> dets;
    const int n = 50 + static_cast<int>(rng.Below(250));
    for (int i = 0; i < n; ++i) {
      const double cx = std::round(rng.Uniform(0, 300));
      const double cy = std::round(rng.Uniform(0, 300));
      const double w = rng.Uniform(4, 80);
      const double h = rng.Uniform(4, 80);
      dets.push_back(Det(cx, cy, cx + w, cy + h,
                         std::round(rng.Uniform() * 40) / 40,
                         static_cast<std::int64_t>(rng.Below(2))));
    }
    const double delta = rng.Uniform(0.05, 0.95);
    const double mu = rng.Uniform(0.0, 0.5);
    ASSERT_EQ(NmsUnc(dets, Params(delta, mu)),
              oracle::LiteralNmsUnc(dets, delta, mu));
    ASSERT_EQ(StandardNms(dets, Params(delta, mu)),
              oracle::LiteralStandardNms(dets, delta, mu));
  }
}

TEST(NmsUncProperty, KeptSetContainmentAndPairwiseSuppression) {
  Rng rng(1234);
  for (int trial = 0; trial < 300; ++trial) {
    const auto dets = oracle::RandomDetections(rng, 20);
    const NmsParams p = Params(0.5, 0.2);
    NmsDiagnostics diag;
    const auto labels = NmsUnc(dets, p, &diag);
    const auto kept = StandardNms(dets, p);
    // Every kept box either becomes a label or is tallied as dropped.
    ASSERT_EQ(static_cast<int>(kept.size()), diag.clusters);
    ASSERT_EQ(labels.size() + diag.singleton_drops + diag.degenerate_drops,
              kept.size());
    // Every emitted label is a kept box.
    for (const PseudoLabel& l : labels) {
      const bool found = std::any_of(kept.begin(), kept.end(), [&](auto& d) {
        return d.bbox == l.bbox && d.score == l.score &&
               d.class_id == l.class_id && d.image_id == l.image_id;
      });
      ASSERT_TRUE(found);
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
      for (std::size_t j = i + 1; j < labels.size(); ++j) {
        if (labels[i].class_id == labels[j].class_id &&
            labels[i].image_id == labels[j].image_id) {
          ASSERT_LT(Iou(labels[i].bbox, labels[j].bbox), p.iou_threshold);
        }
      }
    }
  }
}

TEST(NmsUncProperty, RaisingScoreThresholdNeverAddsLabels) {
  Rng rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    const auto dets = oracle::RandomDetections(rng, 20);
    std::size_t previous = NmsUnc(dets, Params(0.5, 0.0)).size();
    for (double mu = 0.05; mu <= 1.0; mu += 0.05) {
      const std::size_t n = NmsUnc(dets, Params(0.5, mu)).size();
      ASSERT_LE(n, previous);
      previous = n;
    }
  }
}

TEST(NmsUncProperty, TranslationAndScalingInvariance) {
  Rng rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    const std::vector<BBox> c = oracle::RandomCluster(rng, 10);
    const double base = ClusterUncertainty(c);
    const double dx = rng.Uniform(-1e3, 1e3), dy = rng.Uniform(-1e3, 1e3);
    const double s = rng.Uniform(0.05, 20.0);
    std::vector<BBox> moved, scaled;
    for (const BBox& b : c) {
      moved.push_back(b.Translated(dx, dy));
      scaled.push_back(b.Scaled(s));
    }
    ASSERT_NEAR(ClusterUncertainty(moved), base, 1e-9);
    ASSERT_NEAR(ClusterUncertainty(scaled), base, 1e-9);
  }
}

TEST(NmsUncProperty, PermutationGivesIdenticalOutput) {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    auto dets = oracle::RandomDetections(rng, 20);
    const auto before = NmsUnc(dets, Params(0.5, 0.1));
    std::reverse(dets.begin(), dets.end());
    ASSERT_EQ(NmsUnc(dets, Params(0.5, 0.1)), before);
  }
}

TEST(NmsUncProperty, ShardingByImageAndClassGivesSameLabels) {
  Rng rng(64);
  auto key = [](const PseudoLabel& l) {
    return std::make_tuple(-l.score, l.bbox.x1(), l.bbox.y1(), l.bbox.x2(),
                           l.bbox.y2(), l.image_id, l.class_id);
  };
  for (int trial = 0; trial < 200; ++trial) {
    const auto dets = oracle::RandomScene(rng, 40, 3, 3).dets;
    const auto whole = NmsUnc(dets, Params(0.5, 0.1));
    std::map<std::pair<std::int64_t, std::int64_t>, std::vector<Detection>>
        shards;
    for (const Detection& d : dets) shards[{d.image_id, d.class_id}].push_back(d);
    std::vector<PseudoLabel> merged;
    for (const auto& [k, shard] : shards) {
      for (const PseudoLabel& l : NmsUnc(shard, Params(0.5, 0.1))) {
        merged.push_back(l);
      }
    }
    std::stable_sort(merged.begin(), merged.end(),
                     [&](const auto& a, const auto& b) {
                       return key(a) < key(b);
                     });
    ASSERT_EQ(merged, whole);
  }
}

}  // namespace
}  // namespace pslabel
