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

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "hetcal/parallel.hpp"
#include "hetcal/score_model.hpp"

namespace hetcal {

enum class SplitCriterion { gini, auc_gaussian };

struct TreeConfig {
  SplitCriterion criterion = SplitCriterion::gini;
  int max_depth = 3;
  std::size_t min_samples_leaf = 1000;
  // Half-width of the two-point solve used by the auc_gaussian criterion.
  double platt_epsilon = 0.1;
  // Restrict splits to these feature indices (empty: all features).
  std::vector<std::size_t> feature_subset;
};

// Per-node sufficient statistics. Score moments are per label; variances
// are population variances floored at 1e-12 when the label is present.
struct LeafStats {
  std::size_t n = 0;
  std::size_t n_pos = 0;
  double mean0 = 0.0;
  double var0 = 0.0;
  double mean1 = 0.0;
  double var1 = 0.0;

  double positive_rate() const {
    return n == 0 ? 0.0 : static_cast<double>(n_pos) / static_cast<double>(n);
  }
};

// Running sums from which LeafStats are recovered; supports O(1) moves of a
// row between the two sides of a candidate split.
struct ScoreMoments {
  double count[2] = {0.0, 0.0};
  double sum[2] = {0.0, 0.0};
  double sum_sq[2] = {0.0, 0.0};

  void add(int label, double score);
  void remove(int label, double score);
  LeafStats stats() const;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  PartitionId leaf;
  LeafStats stats;

  bool is_leaf() const noexcept { return feature < 0; }
};

// Axis-aligned tree; each leaf is one partition cell. Rows go left iff
// feature value <= threshold.
class PartitionTree {
 public:
  PartitionTree() = default;
  PartitionTree(std::vector<TreeNode> nodes, std::size_t arity);

  PartitionId assign(std::span<const double> features) const;
  std::vector<PartitionId> assign_all(const Dataset& data) const;

  std::size_t leaf_count() const noexcept { return leaf_count_; }
  std::size_t arity() const noexcept { return arity_; }
  std::size_t depth() const;
  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  const TreeNode& leaf_node(PartitionId id) const;

 private:
  std::vector<TreeNode> nodes_;
  std::vector<std::size_t> leaf_index_;
  std::size_t arity_ = 0;
  std::size_t leaf_count_ = 0;
};

struct ClassCounts {
  double n = 0.0;
  double n_pos = 0.0;
};

double gini_impurity(const ClassCounts& c);

// Gini(parent) minus the size-weighted Gini of the children. May be
// negative.
double gini_gain(const ClassCounts& parent, const ClassCounts& left,
                 const ClassCounts& right);

struct GaussianPlatt {
  double a = 1.0;
  double b = 0.0;
  // True when no positive-slope root existed and the pooled-variance closed
  // form was used.
  bool fallback = false;
};

// Fits the Platt pair that calibrates two Gaussian score laws (label 0 ~
// N(mu0, sigma0), label 1 ~ N(mu1, sigma1), positive rate p) by matching the
// calibration identity at logit(p) ± epsilon.
GaussianPlatt gaussian_platt_params(double mu0, double sigma0, double mu1,
                                    double sigma1, double p,
                                    double epsilon = 0.1);

// AUC of the two-sided split after calibrating each side with its Gaussian
// Platt pair, under Gaussian score laws.
double gaussian_calibrated_auc(const LeafStats& left, const LeafStats& right,
                               double epsilon = 0.1);

struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  double score = -std::numeric_limits<double>::infinity();
};

// Best split of `rows` over `features` by the configured criterion, or
// nothing if no admissible split exists. Ties go to the lowest feature
// index, then the lowest threshold. The parallel path evaluates features
// concurrently and returns the same candidate as the serial path.
std::optional<SplitCandidate> find_best_split(
    const Dataset& data, std::span<const std::size_t> rows,
    std::span<const std::size_t> features, const TreeConfig& cfg,
    Execution exec = Execution::parallel);

PartitionTree fit_tree(const Dataset& data, const TreeConfig& cfg,
                       Execution exec = Execution::parallel);

// Bootstrap-resampled trees with √d features drawn per split; deterministic
// given seed.
std::vector<PartitionTree> fit_forest(const Dataset& data,
                                      const TreeConfig& cfg,
                                      std::size_t n_trees, std::uint64_t seed,
                                      Execution exec = Execution::parallel);

// Grows a tree on the given rows (duplicates allowed). When rng is set, a
// random √d-feature subset is drawn at each split.
PartitionTree fit_tree_on_rows(const Dataset& data,
                               std::span<const std::size_t> rows,
                               const TreeConfig& cfg, Rng* rng,
                               Execution exec = Execution::parallel);

}  // namespace hetcal
