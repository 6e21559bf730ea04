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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hetcal/error.hpp"
#include "hetcal/metrics.hpp"
#include "hetcal/numeric.hpp"
#include "hetcal/pipeline.hpp"
#include "hetcal/synth.hpp"

namespace hetcal {
namespace {

// depth 0 means a single leaf, forced through min_samples_leaf.
HetCalConfig base_config(int depth = 3) {
  HetCalConfig cfg;
  cfg.tree.max_depth = std::max(depth, 1);
  cfg.tree.min_samples_leaf = depth == 0 ? 1000000 : 200;
  cfg.seed = 4;
  return cfg;
}

struct Splits {
  Dataset train, calib, test;
};

Splits toy(std::size_t n, std::uint64_t seed) {
  return {gen_heterogeneous(n, 1.8, -0.9, seed),
          gen_heterogeneous(n, 1.8, -0.9, seed + 100),
          gen_heterogeneous(n, 1.8, -0.9, seed + 200)};
}

TEST(Fit, SingleLeafEqualsGlobalCalibration) {
  const auto d = toy(4000, 1);
  for (auto kind : {CalibratorKind::platt, CalibratorKind::isotonic,
                    CalibratorKind::histogram}) {
    auto cfg = base_config(0);
    cfg.calibrator = kind;
    const auto hc = fit(d.train, d.calib, cfg);
    ASSERT_EQ(hc.stages().front().tree.leaf_count(), 1u);
    const auto global = fit_calibrator(d.calib.scores(), d.calib.labels(), cfg);
    const auto out = hc.predict_batch(d.test);
    for (std::size_t i = 0; i < d.test.size(); ++i) {
      EXPECT_EQ(out[i], global.apply(d.test[i].score));
    }
  }
}

TEST(Fit, SmallLeafUsesFallback) {
  // Train has a rare feature value the calibration set sees only once.
  std::vector<LabeledExample> train, calib;
  for (int i = 0; i < 400; ++i) {
    train.push_back({{i < 200 ? 0.0 : 1.0}, i % 2, (i % 2 ? 1.0 : -1.0) + 0.01 * i});
  }
  for (int i = 0; i < 200; ++i) calib.push_back({{0.0}, i % 2, (i % 2) - 0.5 + 0.001 * i});
  calib.push_back({{1.0}, 1, 0.3});
  // Make the tree split on the feature.
  for (auto& ex : train) ex.label = ex.features[0] > 0.5 ? 1 : ex.label;
  HetCalConfig cfg = base_config(1);
  cfg.tree.min_samples_leaf = 10;
  const auto hc = fit(Dataset(train), Dataset(calib), cfg);
  const auto& stage = hc.stages().front();
  ASSERT_EQ(stage.tree.leaf_count(), 2u);
  const auto rare = stage.tree.assign(std::vector<double>{1.0}).value;
  EXPECT_EQ(stage.calib_counts[rare], 1u);
  EXPECT_TRUE(stage.used_fallback[rare]);
  EXPECT_EQ(hc.predict(std::vector<double>{1.0}, 0.7), hc.fallback().apply(0.7));
}

TEST(Fit, SingleLabelLeafFallsBackOnlyForStepCalibrators) {
  std::vector<LabeledExample> train, calib;
  for (int i = 0; i < 400; ++i) {
    const double f = i < 200 ? 0.0 : 1.0;
    train.push_back({{f}, f > 0.5 ? 1 : i % 2, 0.01 * (i % 50)});
    calib.push_back({{f}, f > 0.5 ? 1 : i % 2, 0.01 * (i % 50)});
  }
  for (auto kind : {CalibratorKind::platt, CalibratorKind::isotonic}) {
    HetCalConfig cfg = base_config(1);
    cfg.tree.min_samples_leaf = 10;
    cfg.calibrator = kind;
    const auto hc = fit(Dataset(train), Dataset(calib), cfg);
    const auto& stage = hc.stages().front();
    ASSERT_EQ(stage.tree.leaf_count(), 2u);
    const auto pure = stage.tree.assign(std::vector<double>{1.0}).value;
    EXPECT_EQ(stage.used_fallback[pure], kind != CalibratorKind::platt);
  }
}

TEST(Fit, ErrorsOnBadInput) {
  const auto d = toy(500, 2);
  EXPECT_THROW(fit(Dataset{}, d.calib, base_config()), ValidationError);
  EXPECT_THROW(fit(d.train, Dataset{}, base_config()), ValidationError);
  std::vector<LabeledExample> ones;
  for (int i = 0; i < 10; ++i) ones.push_back({{0.0, 0.5}, 1, double(i)});
  EXPECT_THROW(fit(d.train, Dataset(ones), base_config()), ValidationError);
  auto cfg = base_config();
  cfg.min_calib_samples = 1;
  EXPECT_THROW(fit(d.train, d.calib, cfg), ValidationError);
  cfg = base_config();
  cfg.boosted_stages = 3;
  EXPECT_THROW(fit(d.train, d.calib, cfg), ValidationError);
}

TEST(Predict, ArityMismatch) {
  const auto d = toy(1000, 3);
  const auto hc = fit(d.train, d.calib, base_config());
  EXPECT_THROW(hc.predict(std::vector<double>{1.0}, 0.0), ValidationError);
}

TEST(Predict, UnitPlattEverywhereIsBaseModel) {
  const auto d = toy(3000, 4);
  for (auto comb : {0, 1, 2}) {
    auto cfg = base_config();
    if (comb == 1) cfg.forest_size = 3;
    if (comb == 2) cfg.boosted_stages = 2;
    const auto hc = fit(d.train, d.calib, cfg).with_leaf_transforms(
        [](std::size_t, const TreeNode*) { return Transform::platt(1.0, 0.0); });
    const auto out = hc.predict_batch(d.test);
    for (std::size_t i = 0; i < d.test.size(); ++i) {
      EXPECT_EQ(out[i], sigmoid(d.test[i].score));
    }
  }
}

TEST(Predict, FlatLeafTransformsGiveLeafRates) {
  const auto d = toy(3000, 5);
  const auto hc = fit(d.train, d.calib, base_config()).with_leaf_transforms(
      [](std::size_t, const TreeNode* leaf) {
        if (leaf == nullptr) return Transform::platt(0.0, 0.0);
        return Transform::platt(0.0, logit(leaf->stats.positive_rate()));
      });
  const auto& tree = hc.stages().front().tree;
  for (const auto& ex : d.test) {
    const double rate = tree.leaf_node(tree.assign(ex.features)).stats.positive_rate();
    const double expect = std::clamp(rate, kProbClamp, 1.0 - kProbClamp);
    EXPECT_NEAR(hc.predict(ex.features, ex.score), expect, 1e-15);
  }
}

TEST(Predict, WithinLeafOrderFollowsScores) {
  const auto d = toy(4000, 6);
  const auto hc = fit(d.train, d.calib, base_config());
  const auto& stage = hc.stages().front();
  const auto out = hc.predict_batch(d.test);
  const auto parts = stage.tree.assign_all(d.test);
  for (std::size_t i = 0; i + 1 < d.test.size(); i += 2) {
    for (std::size_t j = i + 1; j < std::min(d.test.size(), i + 40); ++j) {
      if (parts[i] != parts[j]) continue;
      const auto& pp = *stage.transform.as_per_partition();
      const auto it = pp.parts.find(parts[i].value);
      const auto& t = it == pp.parts.end() ? pp.fallback : it->second;
      ASSERT_NE(t.as_platt(), nullptr);
      if (t.as_platt()->a <= 0) continue;
      if (d.test[i].score < d.test[j].score) EXPECT_LE(out[i], out[j]);
      if (d.test[i].score > d.test[j].score) EXPECT_GE(out[i], out[j]);
    }
  }
}

TEST(Predict, SerialAndParallelBatchAgree) {
  const auto d = toy(3000, 7);
  auto cfg = base_config();
  cfg.forest_size = 4;
  const auto a = fit(d.train, d.calib, cfg, Execution::serial);
  const auto b = fit(d.train, d.calib, cfg, Execution::parallel);
  EXPECT_EQ(a.predict_batch(d.test, Execution::serial),
            b.predict_batch(d.test, Execution::parallel));
}

TEST(Forest, OneTreeEqualsSingleTreePrediction) {
  // A one-row train set removes the bootstrap's effect on the tree.
  const auto d = toy(2000, 8);
  Dataset one({d.train[0]});
  auto cfg = base_config();
  auto forest_cfg = cfg;
  forest_cfg.forest_size = 1;
  const auto single = fit(one, d.calib, cfg);
  const auto forest = fit(one, d.calib, forest_cfg);
  EXPECT_EQ(forest.combination(), Combination::forest_average);
  EXPECT_EQ(single.predict_batch(d.test), forest.predict_batch(d.test));
}

TEST(Forest, AverageOfMemberPredictions) {
  const auto d = toy(3000, 9);
  auto cfg = base_config();
  cfg.forest_size = 3;
  const auto hc = fit(d.train, d.calib, cfg);
  ASSERT_EQ(hc.stages().size(), 3u);
  for (std::size_t i = 0; i < 50; ++i) {
    const auto& ex = d.test[i];
    double sum = 0.0;
    for (const auto& st : hc.stages()) {
      sum += st.transform.apply(ex.score, st.tree.assign(ex.features));
    }
    EXPECT_NEAR(hc.predict(ex.features, ex.score), sum / 3.0, 1e-15);
  }
}

TEST(Boosted, IdentityStageCollapses) {
  const auto d = toy(4000, 10);
  auto cfg = base_config();
  cfg.boosted_stages = 2;
  const auto boosted = fit(d.train, d.calib, cfg);
  ASSERT_EQ(boosted.stages().size(), 2u);
  const auto& s1 = boosted.stages()[0];
  const auto& s2 = boosted.stages()[1];

  // Outer stage at (1,0): output is the first stage alone.
  const auto outer_id = boosted.with_leaf_transforms(
      [&](std::size_t stage, const TreeNode* leaf) {
        if (stage == 1) return Transform::platt(1.0, 0.0);
        const auto& pp = *s1.transform.as_per_partition();
        if (leaf == nullptr) return pp.fallback;
        const auto it = pp.parts.find(leaf->leaf.value);
        return it == pp.parts.end() ? pp.fallback : it->second;
      });
  // Inner stage at (1,0): output is the second stage on raw scores.
  const auto inner_id = boosted.with_leaf_transforms(
      [&](std::size_t stage, const TreeNode* leaf) {
        if (stage == 0) return Transform::platt(1.0, 0.0);
        const auto& pp = *s2.transform.as_per_partition();
        if (leaf == nullptr) return pp.fallback;
        const auto it = pp.parts.find(leaf->leaf.value);
        return it == pp.parts.end() ? pp.fallback : it->second;
      });
  for (std::size_t i = 0; i < 500; ++i) {
    const auto& ex = d.test[i];
    EXPECT_EQ(outer_id.predict(ex.features, ex.score),
              s1.transform.apply(ex.score, s1.tree.assign(ex.features)));
    EXPECT_EQ(inner_id.predict(ex.features, ex.score),
              s2.transform.apply(ex.score, s2.tree.assign(ex.features)));
  }
}

TEST(Boosted, TwoFeaturesNoWorseThanEitherStageAlone) {
  ToyModelSpec spec;
  spec.weights = {1.8, 1.8};
  spec.bias = -1.8;
  spec.noise_features = 0;
  const auto train = gen_heterogeneous(20000, spec, 21);
  const auto calib = gen_heterogeneous(20000, spec, 22);
  const auto test = gen_heterogeneous(20000, spec, 23);
  auto cfg = base_config(1);
  cfg.tree.min_samples_leaf = 100;
  auto on_feature = [&](std::size_t f) {
    auto c = cfg;
    c.tree.feature_subset = {f};
    return fit_tree(train, c.tree);
  };
  const auto t0 = on_feature(0);
  const auto t1 = on_feature(1);
  ASSERT_EQ(t0.leaf_count(), 2u);
  ASSERT_EQ(t1.leaf_count(), 2u);
  const auto y = test.labels();
  const double both = empirical_auc(
      fit_boosted_with_trees(t0, t1, calib, cfg).predict_batch(test), y);
  const double only0 = empirical_auc(fit_with_tree(t0, calib, cfg).predict_batch(test), y);
  const double only1 = empirical_auc(fit_with_tree(t1, calib, cfg).predict_batch(test), y);
  EXPECT_GE(both, std::max(only0, only1) - 0.005);
}

TEST(Evaluate, IdentityHasZeroLift) {
  const auto d = toy(3000, 11);
  const auto hc = fit(d.train, d.calib, base_config()).with_leaf_transforms(
      [](std::size_t, const TreeNode*) { return Transform::platt(1.0, 0.0); });
  const auto r = evaluate(hc, d.test);
  EXPECT_EQ(r.auc_lift_percent, 0.0);
  EXPECT_EQ(r.calibrated.auc, r.baseline.auc);
  EXPECT_EQ(r.calibrated.log_loss, r.baseline.log_loss);
}

TEST(Evaluate, GlobalMonotoneCalibrationKeepsAuc) {
  const auto d = toy(3000, 12);
  const auto hc = fit(d.train, d.calib, base_config(0));
  const auto r = evaluate(hc, d.test);
  EXPECT_EQ(r.calibrated.auc, r.baseline.auc);
  EXPECT_EQ(r.auc_lift_percent, 0.0);
}

TEST(Evaluate, HeterogeneousLiftOnToyData) {
  const auto d = toy(20000, 13);
  const auto r = evaluate(fit(d.train, d.calib, base_config()), d.test);
  EXPECT_GT(r.auc_lift_percent, 1.0);
  EXPECT_GE(r.calibrated.pr_auc, 0.0);
  EXPECT_LE(r.calibrated.pr_auc, 1.0);
  EXPECT_TRUE(std::isfinite(r.calibrated.log_loss));
  EXPECT_GE(r.calibrated.ece, 0.0);
  EXPECT_FALSE(r.calibrated.roc.empty());
}

TEST(Evaluate, NeedsBothLabels) {
  std::vector<LabeledExample> ones;
  for (int i = 0; i < 10; ++i) ones.push_back({{0.0, 0.5}, 1, double(i)});
  const auto d = toy(1000, 14);
  const auto hc = fit(d.train, d.calib, base_config());
  EXPECT_THROW(evaluate(hc, Dataset(ones)), ValidationError);
}

}  // namespace
}  // namespace hetcal
