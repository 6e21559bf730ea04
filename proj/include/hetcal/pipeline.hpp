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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hetcal/metrics.hpp"
#include "hetcal/parallel.hpp"
#include "hetcal/partitioner.hpp"
#include "hetcal/score_model.hpp"
#include "hetcal/transform.hpp"

namespace hetcal {

enum class CalibratorKind { platt, isotonic, histogram };

// How the stages of a calibrator combine into one probability.
enum class Combination {
  single,          // one tree
  forest_average,  // mean of per-tree calibrated probabilities
  boosted_chain    // each stage recalibrates the previous stage's logit
};

struct HetCalConfig {
  TreeConfig tree;
  CalibratorKind calibrator = CalibratorKind::platt;
  // Leaves with fewer calibration rows use the global fallback.
  std::size_t min_calib_samples = 50;
  // 0 fits a single tree; n > 0 fits and averages n bootstrap trees.
  std::size_t forest_size = 0;
  // 1 or 2.
  int boosted_stages = 1;
  double platt_ridge = 1e-6;
  std::size_t histogram_bins = 10;
  std::uint64_t seed = 0;
};

// Throws ValidationError on an inconsistent config.
void validate_config(const HetCalConfig& cfg);

// One tree plus its per-leaf transforms. The per-leaf calibration counts and
// fallback flags are fit-time diagnostics and are empty after loading.
struct CalibratedStage {
  PartitionTree tree;
  Transform transform;  // per_partition; fallback = stage-global calibrator
  std::vector<std::size_t> calib_counts;
  std::vector<bool> used_fallback;
};

class HeterogeneousCalibrator {
 public:
  HeterogeneousCalibrator(HetCalConfig config, Combination combination,
                          std::vector<CalibratedStage> stages,
                          Transform fallback);

  const HetCalConfig& config() const noexcept { return config_; }
  Combination combination() const noexcept { return combination_; }
  const std::vector<CalibratedStage>& stages() const noexcept {
    return stages_;
  }
  // Global calibrator fitted on all calibration rows (first stage).
  const Transform& fallback() const noexcept { return fallback_; }
  std::size_t arity() const noexcept { return stages_.front().tree.arity(); }

  double predict(std::span<const double> features, double score) const;
  std::vector<double> predict_batch(const Dataset& data,
                                    Execution exec = Execution::parallel) const;

  // Copy with every leaf transform of every stage replaced by
  // make(stage_index, leaf_node); fallbacks are replaced by
  // make(stage_index, nullptr).
  HeterogeneousCalibrator with_leaf_transforms(
      const std::function<Transform(std::size_t, const TreeNode*)>& make) const;

 private:
  HetCalConfig config_;
  Combination combination_;
  std::vector<CalibratedStage> stages_;
  Transform fallback_;
};

// Fits the calibrator kind on logit-scale scores.
Transform fit_calibrator(std::span<const double> scores,
                         std::span<const int> labels, const HetCalConfig& cfg);

// Calibrates the leaves of `tree` on calib rows whose (stage-input) scores
// are `scores`.
CalibratedStage calibrate_stage(const PartitionTree& tree,
                                const Dataset& calib,
                                std::span<const double> scores,
                                const HetCalConfig& cfg,
                                Execution exec = Execution::parallel);

// Tree on train, per-leaf calibration on calib. Dispatches to the forest or
// boosted variant according to cfg.
HeterogeneousCalibrator fit(const Dataset& train, const Dataset& calib,
                            const HetCalConfig& cfg,
                            Execution exec = Execution::parallel);

// Two stages; the second tree is grown on a seeded bootstrap of train.
HeterogeneousCalibrator fit_boosted(const Dataset& train, const Dataset& calib,
                                    const HetCalConfig& cfg,
                                    Execution exec = Execution::parallel);

// Two stages on caller-supplied partitions.
HeterogeneousCalibrator fit_boosted_with_trees(
    const PartitionTree& first, const PartitionTree& second,
    const Dataset& calib, const HetCalConfig& cfg,
    Execution exec = Execution::parallel);

// Single stage on a caller-supplied partition.
HeterogeneousCalibrator fit_with_tree(const PartitionTree& tree,
                                      const Dataset& calib,
                                      const HetCalConfig& cfg,
                                      Execution exec = Execution::parallel);

struct MetricSet {
  double auc = 0.0;
  double pr_auc = 0.0;
  double log_loss = 0.0;
  double ece = 0.0;
  RocCurve roc;
};

struct EvaluationReport {
  MetricSet calibrated;
  MetricSet baseline;  // σ(score)
  // 100·(calibrated AUC − baseline AUC)/baseline AUC.
  double auc_lift_percent = 0.0;
};

// Metrics of predicted probabilities against labels. Requires both labels.
MetricSet evaluate_predictions(std::span<const double> probabilities,
                               std::span<const int> labels);

EvaluationReport evaluate_probabilities(std::span<const double> calibrated,
                                        std::span<const double> scores,
                                        std::span<const int> labels);

EvaluationReport evaluate(const HeterogeneousCalibrator& hc,
                          const Dataset& test,
                          Execution exec = Execution::parallel);

}  // namespace hetcal
