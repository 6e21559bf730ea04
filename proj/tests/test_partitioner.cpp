/*
 *  Copyright 2026 The hetcal Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "hetcal/error.hpp"
#include "hetcal/numeric.hpp"
#include "hetcal/partitioner.hpp"
#include "hetcal/serialize.hpp"
#include "hetcal/synth.hpp"
#include "oracles.hpp"

namespace hetcal {
namespace {

TreeConfig small_leaves(int depth = 3, std::size_t min_leaf = 1) {
  TreeConfig c;
  c.max_depth = depth;
  c.min_samples_leaf = min_leaf;
  return c;
}

Dataset rows_from(const std::vector<std::pair<std::vector<double>, int>>& r) {
  std::vector<LabeledExample> ex;
  for (const auto& [f, y] : r) ex.push_back({f, y, 0.0});
  return Dataset(ex);
}

TEST(GiniGain, Examples) {
  EXPECT_DOUBLE_EQ(gini_gain({2, 1}, {1, 1}, {1, 0}), 0.5);
  EXPECT_DOUBLE_EQ(gini_gain({8, 4}, {4, 2}, {4, 2}), 0.0);
  EXPECT_DOUBLE_EQ(gini_gain({8, 6}, {6, 6}, {2, 0}), 0.375);
}

TEST(FitTree, PerfectFeatureSplitsOnceIntoPureLeaves) {
  std::vector<std::pair<std::vector<double>, int>> r;
  for (int i = 0; i < 40; ++i) r.push_back({{double(i % 3), double(i % 2)}, i % 2});
  const auto tree = fit_tree(rows_from(r), small_leaves(1));
  ASSERT_EQ(tree.leaf_count(), 2u);
  EXPECT_EQ(tree.nodes()[0].feature, 1);
  EXPECT_EQ(tree.nodes()[0].threshold, 0.5);
  for (std::size_t l = 0; l < 2; ++l) {
    const auto& st = tree.leaf_node(PartitionId{l}).stats;
    EXPECT_TRUE(st.n_pos == 0 || st.n_pos == st.n);
  }
}

TEST(FitTree, ConstantFeaturesGiveOneLeaf) {
  std::vector<std::pair<std::vector<double>, int>> r;
  for (int i = 0; i < 20; ++i) r.push_back({{1.0, 2.0}, i % 2});
  const auto tree = fit_tree(rows_from(r), small_leaves());
  EXPECT_EQ(tree.leaf_count(), 1u);
}

TEST(FitTree, XorWithUnequalCellsGivesFourPureLeaves) {
  // Unequal cell counts give the root a positive gain; exactly balanced XOR
  // has zero root gain and greedy growth would stop there.
  std::vector<std::pair<std::vector<double>, int>> r;
  auto cell = [&](double a, double b, int y, int count) {
    for (int i = 0; i < count; ++i) r.push_back({{a, b}, y});
  };
  cell(0, 0, 0, 30);
  cell(0, 1, 1, 20);
  cell(1, 0, 1, 25);
  cell(1, 1, 0, 35);
  const auto tree = fit_tree(rows_from(r), small_leaves(2));
  ASSERT_EQ(tree.leaf_count(), 4u);
  for (std::size_t l = 0; l < 4; ++l) {
    const auto& st = tree.leaf_node(PartitionId{l}).stats;
    EXPECT_TRUE(st.n_pos == 0 || st.n_pos == st.n);
  }
  // Exhaustive check of the depth-2 result: every cell routes to a pure leaf
  // holding exactly that cell.
  for (double a : {0.0, 1.0}) {
    for (double b : {0.0, 1.0}) {
      const auto& st = tree.leaf_node(tree.assign(std::vector<double>{a, b})).stats;
      const int expected = (a == 0 && b == 0) ? 30 : (a == 0) ? 20 : (b == 0) ? 25 : 35;
      EXPECT_EQ(st.n, static_cast<std::size_t>(expected));
    }
  }
}

TEST(FitTree, EmptyDataIsError) {
  EXPECT_THROW(fit_tree(Dataset{}, TreeConfig{}), ValidationError);
}

TEST(FitTree, ConfigLimitsHold) {
  const auto data = gen_heterogeneous(5000, 1.8, -0.9, 3);
  for (int depth : {1, 2, 3, 4}) {
    for (std::size_t min_leaf : {1u, 50u, 700u}) {
      for (auto crit : {SplitCriterion::gini, SplitCriterion::auc_gaussian}) {
        auto cfg = small_leaves(depth, min_leaf);
        cfg.criterion = crit;
        const auto tree = fit_tree(data, cfg);
        EXPECT_LE(tree.depth(), static_cast<std::size_t>(depth));
        std::size_t total = 0;
        for (std::size_t l = 0; l < tree.leaf_count(); ++l) {
          const auto n = tree.leaf_node(PartitionId{l}).stats.n;
          EXPECT_GE(n, min_leaf);
          total += n;
        }
        EXPECT_EQ(total, data.size());
      }
    }
  }
}

TEST(FitTree, LeafIdsAreDenseAndCountsMatchRouting) {
  const auto data = gen_heterogeneous(3000, 1.8, -0.9, 4);
  const auto tree = fit_tree(data, small_leaves(3, 100));
  std::vector<std::size_t> counts(tree.leaf_count(), 0);
  for (const auto& id : tree.assign_all(data)) {
    ASSERT_LT(id.value, tree.leaf_count());
    ++counts[id.value];
  }
  for (std::size_t l = 0; l < counts.size(); ++l) {
    EXPECT_EQ(counts[l], tree.leaf_node(PartitionId{l}).stats.n);
  }
}

TEST(FitTree, MinLeafBlocksSplitsOfSmallNodes) {
  std::vector<std::pair<std::vector<double>, int>> r;
  for (int i = 0; i < 10; ++i) r.push_back({{double(i)}, i < 5 ? 0 : 1});
  EXPECT_EQ(fit_tree(rows_from(r), small_leaves(3, 6)).leaf_count(), 1u);
  EXPECT_EQ(fit_tree(rows_from(r), small_leaves(3, 5)).leaf_count(), 2u);
}

TEST(FitTree, TiesBreakToLowestFeature) {
  // Features 0 and 1 are identical, so every split ties.
  std::vector<std::pair<std::vector<double>, int>> r;
  for (int i = 0; i < 20; ++i) r.push_back({{double(i), double(i)}, i < 10 ? 0 : 1});
  const auto tree = fit_tree(rows_from(r), small_leaves(1));
  EXPECT_EQ(tree.nodes()[0].feature, 0);
  EXPECT_EQ(tree.nodes()[0].threshold, 9.5);
}

TEST(FitTree, SerialAndParallelAgree) {
  ToyModelSpec spec;
  spec.weights = {1.8, 0.7};
  spec.noise_features = 3;
  const auto data = gen_heterogeneous(4000, spec, 8);
  for (auto crit : {SplitCriterion::gini, SplitCriterion::auc_gaussian}) {
    auto cfg = small_leaves(3, 200);
    cfg.criterion = crit;
    EXPECT_EQ(tree_to_json(fit_tree(data, cfg, Execution::serial)),
              tree_to_json(fit_tree(data, cfg, Execution::parallel)));
  }
}

TEST(FitTree, FeatureSubsetIsRespected) {
  ToyModelSpec spec;
  spec.weights = {1.8};
  spec.noise_features = 2;
  const auto data = gen_heterogeneous(3000, spec, 9);
  auto cfg = small_leaves(2, 100);
  cfg.feature_subset = {2};
  const auto tree = fit_tree(data, cfg);
  for (const auto& n : tree.nodes()) {
    if (!n.is_leaf()) EXPECT_EQ(n.feature, 2);
  }
  cfg.feature_subset = {9};
  EXPECT_THROW(fit_tree(data, cfg), ValidationError);
}

TEST(GaussianPlatt, SymmetricExamples) {
  const auto a = gaussian_platt_params(-1.0, std::sqrt(2.0), 1.0, std::sqrt(2.0), 0.5);
  EXPECT_NEAR(a.a, 1.0, 1e-6);
  EXPECT_NEAR(a.b, 0.0, 1e-6);
  EXPECT_FALSE(a.fallback);
  const auto b = gaussian_platt_params(-1.0, 1.0, 1.0, 1.0, 0.5);
  EXPECT_NEAR(b.a, 2.0, 1e-6);
  EXPECT_NEAR(b.b, 0.0, 1e-6);
}

TEST(GaussianPlatt, SymmetricClosedFormOverAGrid) {
  for (double mu : {0.3, 1.0, 2.5}) {
    for (double sd : {0.5, 1.0, 3.0}) {
      const auto r = gaussian_platt_params(-mu, sd, mu, sd, 0.5);
      EXPECT_NEAR(r.a, 2.0 * mu / (sd * sd), 1e-6);
      EXPECT_NEAR(r.b, 0.0, 1e-6);
    }
  }
}

TEST(GaussianPlatt, ScalingMeansAndSigmasScalesSlope) {
  const auto base = gaussian_platt_params(-1.0, 1.5, 1.0, 1.5, 0.5);
  for (double c : {0.5, 2.0, 7.0}) {
    const auto r = gaussian_platt_params(-c, 1.5 * c, c, 1.5 * c, 0.5);
    EXPECT_NEAR(r.a, base.a / c, 1e-9);
    EXPECT_NEAR(r.b, base.b, 1e-9);
  }
}

// The two-point calibration system, written out independently.
double system_residual(double s, double a, double b, double mu0, double sd0,
                       double mu1, double sd1, double p) {
  const double lhs = s + std::log((1 - p) * sd1 / (p * sd0));
  const double z1 = (s - a * mu1 - b) / (a * sd1);
  const double z0 = (s - a * mu0 - b) / (a * sd0);
  return lhs - (-0.5 * z1 * z1 + 0.5 * z0 * z0);
}

TEST(GaussianPlatt, SolvesTheTwoPointSystemForUnequalVariances) {
  Rng rng(17);
  std::uniform_real_distribution<double> mean(-2.0, 2.0), sd(0.5, 3.0),
      rate(0.05, 0.95);
  int solved = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const double mu0 = mean(rng), mu1 = mu0 + std::abs(mean(rng)) + 0.1;
    const double s0 = sd(rng), s1 = sd(rng), p = rate(rng);
    const auto r = gaussian_platt_params(mu0, s0, mu1, s1, p);
    if (r.fallback) continue;
    ++solved;
    EXPECT_GT(r.a, 0.0);
    const double base = std::log(p / (1 - p));
    for (double s : {base - 0.1, base + 0.1}) {
      EXPECT_NEAR(system_residual(s, r.a, r.b, mu0, s0, mu1, s1, p), 0.0, 1e-8);
    }
  }
  EXPECT_GT(solved, 250);
}

TEST(GaussianPlatt, FallbackIsFlaggedPooledForm) {
  // Reversed means: no positive-slope solution.
  const auto r = gaussian_platt_params(1.0, 1.0, -1.0, 2.0, 0.3);
  if (r.fallback) {
    const double pooled = 0.5 * (1.0 + 4.0);
    EXPECT_NEAR(r.a, -2.0 / pooled, 1e-12);
  } else {
    EXPECT_GT(r.a, 0.0);
  }
  EXPECT_THROW(gaussian_platt_params(0, 0, 1, 1, 0.5), ValidationError);
  EXPECT_THROW(gaussian_platt_params(0, 1, 1, 1, 1.0), ValidationError);
}

LeafStats stats(std::size_t n, std::size_t pos, double m0, double v0, double m1,
                double v1) {
  LeafStats s;
  s.n = n;
  s.n_pos = pos;
  s.mean0 = m0;
  s.var0 = v0;
  s.mean1 = m1;
  s.var1 = v1;
  return s;
}

TEST(GaussianCalibratedAuc, IdenticalSidesGiveTwoGaussianAuc) {
  for (double gap : {0.5, 1.0, 2.0}) {
    for (double v0 : {1.0, 2.0}) {
      const double v1 = 1.5;
      const auto s = stats(1000, 400, -gap / 2, v0, gap / 2, v1);
      const double expect = testing::phi_cdf(gap / std::sqrt(v0 + v1));
      EXPECT_NEAR(gaussian_calibrated_auc(s, s), expect, 1e-5);
    }
  }
}

TEST(GaussianCalibratedAuc, WideSeparationApproachesOne) {
  const auto s = stats(1000, 500, -50.0, 1.0, 50.0, 1.0);
  EXPECT_NEAR(gaussian_calibrated_auc(s, s), 1.0, 1e-9);
}

TEST(GaussianCalibratedAuc, MatchesClosedFormMixtureOracle) {
  // Equal variances per side keep the calibrated maps exactly linear, so the
  // calibrated laws are Gaussian mixtures with a closed-form AUC.
  const auto l = stats(600, 150, -1.0, 2.0, 0.5, 2.0);
  const auto r = stats(400, 300, -0.2, 1.0, 1.5, 1.0);
  auto side = [](const LeafStats& s, std::vector<testing::Gauss>& pos,
                 std::vector<testing::Gauss>& neg) {
    const double sd = std::sqrt(s.var0);
    const double a = (s.mean1 - s.mean0) / s.var0;
    const double b = std::log(s.positive_rate() / (1 - s.positive_rate())) +
                     (s.mean0 * s.mean0 - s.mean1 * s.mean1) / (2 * s.var0);
    pos.push_back({double(s.n_pos), a * s.mean1 + b, a * sd});
    neg.push_back({double(s.n - s.n_pos), a * s.mean0 + b, a * sd});
  };
  std::vector<testing::Gauss> pos, neg;
  side(l, pos, neg);
  side(r, pos, neg);
  EXPECT_NEAR(gaussian_calibrated_auc(l, r), testing::gaussian_mixture_auc(pos, neg),
              1e-6);
}

TEST(GaussianCalibratedAuc, DegenerateSideIsPointMass) {
  const auto good = stats(100, 50, -1.0, 1.0, 1.0, 1.0);
  const auto pure = stats(100, 100, 0.0, 0.0, 3.0, 1.0);
  const double v = gaussian_calibrated_auc(good, pure);
  EXPECT_GT(v, 0.5);
  EXPECT_LE(v, 1.0);
  EXPECT_TRUE(std::isfinite(gaussian_calibrated_auc(good, LeafStats{})));
}

TEST(GaussianCalibratedAuc, PrefersHeterogeneousFeatureSplit) {
  ToyModelSpec spec;
  spec.weights = {0.0};
  spec.noise_features = 1;
  const auto data = gen_heterogeneous(20000, spec, 31);
  auto split_value = [&](std::size_t feature, double threshold) {
    ScoreMoments left, right;
    for (const auto& ex : data) {
      (ex.features[feature] <= threshold ? left : right).add(ex.label, ex.score);
    }
    return gaussian_calibrated_auc(left.stats(), right.stats());
  };
  const double het = split_value(0, 0.5);
  for (double t : {0.1, 0.3, 0.5, 0.7, 0.9}) EXPECT_GT(het, split_value(1, t) + 0.01);

  TreeConfig cfg;
  cfg.criterion = SplitCriterion::auc_gaussian;
  cfg.max_depth = 1;
  cfg.min_samples_leaf = 100;
  const auto tree = fit_tree(data, cfg);
  ASSERT_EQ(tree.leaf_count(), 2u);
  EXPECT_EQ(tree.nodes()[0].feature, 0);
}

TEST(Assign, SingleLeafAndSimpleSplit) {
  TreeNode leaf;
  PartitionTree single({leaf}, 2);
  EXPECT_EQ(single.assign(std::vector<double>{5.0, -1.0}).value, 0u);

  TreeNode root;
  root.feature = 0;
  root.threshold = 0.5;
  root.left = 1;
  root.right = 2;
  TreeNode l, r;
  l.leaf = PartitionId{0};
  r.leaf = PartitionId{1};
  PartitionTree tree({root, l, r}, 1);
  EXPECT_EQ(tree.assign(std::vector<double>{0.2}).value, 0u);
  EXPECT_EQ(tree.assign(std::vector<double>{0.5}).value, 0u);
  EXPECT_EQ(tree.assign(std::vector<double>{0.6}).value, 1u);
  EXPECT_THROW(tree.assign(std::vector<double>{0.2, 1.0}), ValidationError);
}

TEST(Assign, ConstructorRejectsGapsAndBadChildren) {
  TreeNode root;
  root.feature = 0;
  root.threshold = 0.5;
  root.left = 1;
  root.right = 2;
  TreeNode l, r;
  l.leaf = PartitionId{0};
  r.leaf = PartitionId{2};
  EXPECT_THROW(PartitionTree({root, l, r}, 1), ValidationError);
  r.leaf = PartitionId{1};
  EXPECT_THROW(PartitionTree({root, l, r}, 0), ValidationError);
  root.right = 5;
  EXPECT_THROW(PartitionTree({root, l, r}, 1), ValidationError);
}

// Independent region check: collect each leaf's box from its root path and
// count how many boxes contain the point.
void collect_boxes(const PartitionTree& t, int node, std::vector<double> lo,
                   std::vector<double> hi,
                   std::vector<std::pair<std::vector<double>, std::vector<double>>>& out) {
  const auto& n = t.nodes()[static_cast<std::size_t>(node)];
  if (n.is_leaf()) {
    out.emplace_back(lo, hi);
    return;
  }
  auto hi_left = hi;
  hi_left[n.feature] = std::min(hi_left[n.feature], n.threshold);
  collect_boxes(t, n.left, lo, hi_left, out);
  auto lo_right = lo;
  lo_right[n.feature] = std::max(lo_right[n.feature], n.threshold);
  collect_boxes(t, n.right, lo_right, hi, out);
}

TEST(Assign, LeafRegionsPartitionTheSpace) {
  ToyModelSpec spec;
  spec.weights = {1.8, 1.0};
  spec.noise_features = 2;
  const auto data = gen_heterogeneous(4000, spec, 12);
  const auto tree = fit_tree(data, small_leaves(4, 30));
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::pair<std::vector<double>, std::vector<double>>> boxes;
  collect_boxes(tree, 0, std::vector<double>(4, -inf), std::vector<double>(4, inf),
                boxes);
  ASSERT_EQ(boxes.size(), tree.leaf_count());
  Rng rng(1);
  std::uniform_real_distribution<double> u(-0.5, 1.5);
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> x(4);
    for (auto& v : x) v = u(rng);
    if (i % 2 == 0) x[0] = std::round(x[0]);
    int hits = 0;
    for (const auto& [lo, hi] : boxes) {
      bool in = true;
      for (std::size_t f = 0; f < 4; ++f) in = in && x[f] > lo[f] && x[f] <= hi[f];
      hits += in;
    }
    EXPECT_EQ(hits, 1);
    EXPECT_NO_THROW(tree.assign(x));
  }
}

TEST(FitForest, SingleRowMatchesSingleTree) {
  const auto data = rows_from({{{1.0, 2.0}, 1}});
  const auto forest = fit_forest(data, small_leaves(), 1, 5);
  ASSERT_EQ(forest.size(), 1u);
  EXPECT_EQ(tree_to_json(forest[0]), tree_to_json(fit_tree(data, small_leaves())));
}

TEST(FitForest, DeterministicGivenSeed) {
  ToyModelSpec spec;
  spec.weights = {1.8};
  spec.noise_features = 3;
  const auto data = gen_heterogeneous(3000, spec, 2);
  const auto cfg = small_leaves(3, 100);
  const auto a = fit_forest(data, cfg, 5, 77, Execution::serial);
  const auto b = fit_forest(data, cfg, 5, 77, Execution::parallel);
  const auto c = fit_forest(data, cfg, 5, 78, Execution::parallel);
  bool differs = false;
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(tree_to_json(a[i]), tree_to_json(b[i]));
    differs = differs || tree_to_json(a[i]) != tree_to_json(c[i]);
  }
  EXPECT_TRUE(differs);
  EXPECT_THROW(fit_forest(data, cfg, 0, 1), ValidationError);
}

}  // namespace
}  // namespace hetcal
