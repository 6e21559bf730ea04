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

#include "hetcal/pipeline.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <random>

#include "hetcal/error.hpp"
#include "hetcal/numeric.hpp"

namespace hetcal {

void validate_config(const HetCalConfig& cfg) {
  if (cfg.tree.max_depth < 1) throw ValidationError("max_depth must be >= 1");
  if (cfg.tree.min_samples_leaf < 1) {
    throw ValidationError("min_samples_leaf must be >= 1");
  }
  if (cfg.min_calib_samples < 2) {
    throw ValidationError("min_calib_samples must be >= 2");
  }
  if (cfg.boosted_stages != 1 && cfg.boosted_stages != 2) {
    throw ValidationError("boosted_stages must be 1 or 2");
  }
  if (cfg.boosted_stages == 2 && cfg.forest_size > 0) {
    throw ValidationError("a forest cannot also be boosted");
  }
  if (cfg.histogram_bins < 1) throw ValidationError("histogram_bins must be >= 1");
  if (!(cfg.platt_ridge >= 0.0)) throw ValidationError("platt_ridge must be >= 0");
  if (!(cfg.tree.platt_epsilon > 0.0)) {
    throw ValidationError("platt_epsilon must be positive");
  }
}

// ---------------------------------------------------------------------------
// HeterogeneousCalibrator

HeterogeneousCalibrator::HeterogeneousCalibrator(
    HetCalConfig config, Combination combination,
    std::vector<CalibratedStage> stages, Transform fallback)
    : config_(std::move(config)),
      combination_(combination),
      stages_(std::move(stages)),
      fallback_(std::move(fallback)) {
  if (stages_.empty()) throw ValidationError("calibrator has no stages");
  if (combination_ == Combination::single && stages_.size() != 1) {
    throw ValidationError("single calibrator must have exactly one stage");
  }
  const std::size_t arity = stages_.front().tree.arity();
  for (const auto& s : stages_) {
    if (s.tree.arity() != arity) {
      throw ValidationError("calibrator stages disagree on feature arity");
    }
    if (s.transform.kind() != Transform::Kind::per_partition) {
      throw ValidationError("stage transform must be per_partition");
    }
  }
}

double HeterogeneousCalibrator::predict(std::span<const double> features,
                                        double score) const {
  switch (combination_) {
    case Combination::single: {
      const auto& s = stages_.front();
      return s.transform.apply(score, s.tree.assign(features));
    }
    case Combination::forest_average: {
      // Mean taken as offsets from the first member, so identical members
      // return their common value bit for bit.
      const auto& first = stages_.front();
      const double p0 = first.transform.apply(score, first.tree.assign(features));
      double offset = 0.0;
      for (std::size_t k = 1; k < stages_.size(); ++k) {
        const auto& s = stages_[k];
        offset += s.transform.apply(score, s.tree.assign(features)) - p0;
      }
      return p0 + offset / static_cast<double>(stages_.size());
    }
    case Combination::boosted_chain: {
      double z = score;
      for (std::size_t k = 0; k + 1 < stages_.size(); ++k) {
        const auto& s = stages_[k];
        z = s.transform.apply_logit(z, s.tree.assign(features));
      }
      const auto& last = stages_.back();
      return last.transform.apply(z, last.tree.assign(features));
    }
  }
  return 0.0;
}

std::vector<double> HeterogeneousCalibrator::predict_batch(
    const Dataset& data, Execution exec) const {
  if (!data.empty() && data.arity() != arity()) {
    throw ValidationError("feature arity " + std::to_string(data.arity()) +
                          " does not match model arity " +
                          std::to_string(arity()));
  }
  std::vector<double> out(data.size());
  const auto n = static_cast<std::ptrdiff_t>(data.size());
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto& ex = data[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(i)] = predict(ex.features, ex.score);
    }
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto& ex = data[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(i)] = predict(ex.features, ex.score);
    }
  }
  return out;
}

HeterogeneousCalibrator HeterogeneousCalibrator::with_leaf_transforms(
    const std::function<Transform(std::size_t, const TreeNode*)>& make) const {
  std::vector<CalibratedStage> stages = stages_;
  for (std::size_t k = 0; k < stages.size(); ++k) {
    auto& s = stages[k];
    std::map<std::size_t, Transform> parts;
    for (std::size_t leaf = 0; leaf < s.tree.leaf_count(); ++leaf) {
      parts.emplace(leaf, make(k, &s.tree.leaf_node(PartitionId{leaf})));
    }
    s.transform = Transform::per_partition(std::move(parts), make(k, nullptr));
  }
  return HeterogeneousCalibrator(config_, combination_, std::move(stages),
                                 make(0, nullptr));
}

// ---------------------------------------------------------------------------
// Fitting

Transform fit_calibrator(std::span<const double> scores,
                         std::span<const int> labels, const HetCalConfig& cfg) {
  switch (cfg.calibrator) {
    case CalibratorKind::platt: {
      PlattOptions opt;
      opt.ridge = cfg.platt_ridge;
      return fit_platt(scores, labels, opt);
    }
    case CalibratorKind::isotonic:
      return fit_isotonic(scores, labels);
    case CalibratorKind::histogram:
      return fit_histogram(scores, labels, cfg.histogram_bins);
  }
  return Transform::identity();
}

CalibratedStage calibrate_stage(const PartitionTree& tree,
                                const Dataset& calib,
                                std::span<const double> scores,
                                const HetCalConfig& cfg, Execution exec) {
  require_nonempty(calib, "calibration");
  if (scores.size() != calib.size()) {
    throw ValidationError("calibrate_stage: one score per calibration row");
  }
  const auto labels = calib.labels();
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0 || static_cast<std::size_t>(positives) == labels.size()) {
    throw ValidationError("calibration data must contain both labels");
  }

  const std::size_t leaves = tree.leaf_count();
  std::vector<std::vector<double>> leaf_scores(leaves);
  std::vector<std::vector<int>> leaf_labels(leaves);
  for (std::size_t i = 0; i < calib.size(); ++i) {
    const auto leaf = tree.assign(calib[i].features).value;
    leaf_scores[leaf].push_back(scores[i]);
    leaf_labels[leaf].push_back(labels[i]);
  }

  CalibratedStage stage;
  stage.tree = tree;
  stage.calib_counts.resize(leaves);
  for (std::size_t l = 0; l < leaves; ++l) {
    stage.calib_counts[l] = leaf_scores[l].size();
  }

  std::vector<std::optional<Transform>> fitted(leaves);
  auto fit_leaf = [&](std::size_t l) {
    const auto& y = leaf_labels[l];
    if (y.size() < cfg.min_calib_samples) return;
    const auto pos = std::count(y.begin(), y.end(), 1);
    const bool single_label =
        pos == 0 || static_cast<std::size_t>(pos) == y.size();
    if (single_label && cfg.calibrator != CalibratorKind::platt) return;
    fitted[l] = fit_calibrator(leaf_scores[l], y, cfg);
  };
  const auto n = static_cast<std::ptrdiff_t>(leaves);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t l = 0; l < n; ++l) fit_leaf(static_cast<std::size_t>(l));
  } else {
    for (std::ptrdiff_t l = 0; l < n; ++l) fit_leaf(static_cast<std::size_t>(l));
  }

  std::map<std::size_t, Transform> parts;
  stage.used_fallback.resize(leaves);
  for (std::size_t l = 0; l < leaves; ++l) {
    stage.used_fallback[l] = !fitted[l].has_value();
    if (fitted[l]) parts.emplace(l, std::move(*fitted[l]));
  }
  stage.transform = Transform::per_partition(std::move(parts),
                                             fit_calibrator(scores, labels, cfg));
  return stage;
}

namespace {

void check_inputs(const Dataset& calib, const HetCalConfig& cfg) {
  validate_config(cfg);
  require_nonempty(calib, "calibration");
}

HeterogeneousCalibrator assemble(const HetCalConfig& cfg, Combination c,
                                 std::vector<CalibratedStage> stages) {
  Transform fallback = stages.front().transform.as_per_partition()->fallback;
  return HeterogeneousCalibrator(cfg, c, std::move(stages),
                                 std::move(fallback));
}

}  // namespace

HeterogeneousCalibrator fit_with_tree(const PartitionTree& tree,
                                      const Dataset& calib,
                                      const HetCalConfig& cfg, Execution exec) {
  check_inputs(calib, cfg);
  if (calib.arity() != tree.arity()) {
    throw ValidationError("calibration arity does not match the tree");
  }
  const auto scores = calib.scores();
  std::vector<CalibratedStage> stages;
  stages.push_back(calibrate_stage(tree, calib, scores, cfg, exec));
  return assemble(cfg, Combination::single, std::move(stages));
}

HeterogeneousCalibrator fit_boosted_with_trees(const PartitionTree& first,
                                               const PartitionTree& second,
                                               const Dataset& calib,
                                               const HetCalConfig& cfg,
                                               Execution exec) {
  check_inputs(calib, cfg);
  if (calib.arity() != first.arity() || calib.arity() != second.arity()) {
    throw ValidationError("calibration arity does not match the trees");
  }
  std::vector<CalibratedStage> stages;
  const auto raw = calib.scores();
  stages.push_back(calibrate_stage(first, calib, raw, cfg, exec));

  std::vector<double> inner(calib.size());
  const auto& t1 = stages.front();
  for (std::size_t i = 0; i < calib.size(); ++i) {
    inner[i] = t1.transform.apply_logit(raw[i], first.assign(calib[i].features));
  }
  stages.push_back(calibrate_stage(second, calib, inner, cfg, exec));
  return assemble(cfg, Combination::boosted_chain, std::move(stages));
}

HeterogeneousCalibrator fit_boosted(const Dataset& train, const Dataset& calib,
                                    const HetCalConfig& cfg, Execution exec) {
  check_inputs(calib, cfg);
  require_nonempty(train, "train");
  const auto first = fit_tree(train, cfg.tree, exec);

  Rng rng = derive_rng(cfg.seed, 0x626f, 1);
  std::uniform_int_distribution<std::size_t> pick(0, train.size() - 1);
  std::vector<std::size_t> rows(train.size());
  for (auto& r : rows) r = pick(rng);
  const auto second = fit_tree_on_rows(train, rows, cfg.tree, nullptr, exec);
  return fit_boosted_with_trees(first, second, calib, cfg, exec);
}

HeterogeneousCalibrator fit(const Dataset& train, const Dataset& calib,
                            const HetCalConfig& cfg, Execution exec) {
  check_inputs(calib, cfg);
  require_nonempty(train, "train");
  if (train.arity() != calib.arity()) {
    throw ValidationError("train and calibration feature arity differ");
  }
  if (cfg.boosted_stages == 2) return fit_boosted(train, calib, cfg, exec);
  if (cfg.forest_size == 0) {
    return fit_with_tree(fit_tree(train, cfg.tree, exec), calib, cfg, exec);
  }

  const auto trees = fit_forest(train, cfg.tree, cfg.forest_size, cfg.seed, exec);
  const auto scores = calib.scores();
  std::vector<CalibratedStage> stages;
  for (const auto& t : trees) {
    stages.push_back(calibrate_stage(t, calib, scores, cfg, exec));
  }
  return assemble(cfg, Combination::forest_average, std::move(stages));
}

// ---------------------------------------------------------------------------
// Evaluation

MetricSet evaluate_predictions(std::span<const double> probabilities,
                               std::span<const int> labels) {
  MetricSet m;
  m.auc = empirical_auc(probabilities, labels);
  m.roc = empirical_roc_curve(probabilities, labels);
  m.pr_auc = pr_auc(m.roc);
  m.log_loss = empirical_log_loss(probabilities, labels);
  m.ece = binned_calibration_error(probabilities, labels);
  return m;
}

EvaluationReport evaluate_probabilities(std::span<const double> calibrated,
                                        std::span<const double> scores,
                                        std::span<const int> labels) {
  if (calibrated.size() != scores.size()) {
    throw ValidationError("evaluate: one prediction per row required");
  }
  std::vector<double> base(scores.size());
  std::transform(scores.begin(), scores.end(), base.begin(),
                 [](double s) { return sigmoid(s); });
  EvaluationReport r;
  r.calibrated = evaluate_predictions(calibrated, labels);
  r.baseline = evaluate_predictions(base, labels);
  r.auc_lift_percent =
      100.0 * (r.calibrated.auc - r.baseline.auc) / r.baseline.auc;
  return r;
}

EvaluationReport evaluate(const HeterogeneousCalibrator& hc,
                          const Dataset& test, Execution exec) {
  require_nonempty(test, "test");
  const auto probs = hc.predict_batch(test, exec);
  const auto scores = test.scores();
  const auto labels = test.labels();
  return evaluate_probabilities(probs, scores, labels);
}

}  // namespace hetcal
