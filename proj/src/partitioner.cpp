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

#include "hetcal/partitioner.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "hetcal/error.hpp"
#include "hetcal/numeric.hpp"

namespace hetcal {

namespace {

constexpr double kVarianceFloor = 1e-12;
// Minimum improvement for the Gaussian criterion; matches its quadrature
// tolerance so integration noise never triggers a split.
constexpr double kAucImprovement = 1e-6;
constexpr double kGiniImprovement = 1e-12;

}  // namespace

// ---------------------------------------------------------------------------
// Statistics

void ScoreMoments::add(int label, double score) {
  count[label] += 1.0;
  sum[label] += score;
  sum_sq[label] += score * score;
}

void ScoreMoments::remove(int label, double score) {
  count[label] -= 1.0;
  sum[label] -= score;
  sum_sq[label] -= score * score;
}

LeafStats ScoreMoments::stats() const {
  LeafStats st;
  st.n = static_cast<std::size_t>(count[0] + count[1]);
  st.n_pos = static_cast<std::size_t>(count[1]);
  auto moments = [&](int y, double& mean, double& var) {
    if (count[y] <= 0.0) return;
    mean = sum[y] / count[y];
    var = std::max(sum_sq[y] / count[y] - mean * mean, kVarianceFloor);
  };
  moments(0, st.mean0, st.var0);
  moments(1, st.mean1, st.var1);
  return st;
}

double gini_impurity(const ClassCounts& c) {
  if (c.n <= 0.0) return 0.0;
  const double p = c.n_pos / c.n;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

double gini_gain(const ClassCounts& parent, const ClassCounts& left,
                 const ClassCounts& right) {
  const double n = parent.n;
  return gini_impurity(parent) - left.n / n * gini_impurity(left) -
         right.n / n * gini_impurity(right);
}

// ---------------------------------------------------------------------------
// Gaussian Platt solve

GaussianPlatt gaussian_platt_params(double mu0, double sigma0, double mu1,
                                    double sigma1, double p, double epsilon) {
  if (!(sigma0 > 0.0) || !(sigma1 > 0.0)) {
    throw ValidationError("gaussian_platt_params: sigmas must be positive");
  }
  if (!(p > 0.0 && p < 1.0)) {
    throw ValidationError("gaussian_platt_params: p must lie in (0,1)");
  }

  // Calibrated log-odds as a function of the raw score x:
  //   l(x) = A x² + B x + C.
  const double v0 = sigma0 * sigma0;
  const double v1 = sigma1 * sigma1;
  const double base = std::log(p / (1.0 - p));
  const double A = 0.5 * (1.0 / v0 - 1.0 / v1);
  const double B = mu1 / v1 - mu0 / v0;
  const double C = base + std::log(sigma0 / sigma1) - 0.5 * mu1 * mu1 / v1 +
                   0.5 * mu0 * mu0 / v0;

  GaussianPlatt out;
  if (A == 0.0) {
    // Equal variances: the log-odds are exactly linear.
    if (B > 0.0) {
      out.a = B;
      out.b = C;
      return out;
    }
  } else {
    // Platt output s = a x + b must satisfy s = l(x) at both targets.
    const double targets[2] = {base - epsilon, base + epsilon};
    std::vector<double> roots[2];
    for (int k = 0; k < 2; ++k) {
      const double c = C - targets[k];
      const double disc = B * B - 4.0 * A * c;
      if (disc < 0.0) continue;
      const double q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
      if (q != 0.0) roots[k].push_back(c / q);
      roots[k].push_back(q / A);
    }
    const double centre = 0.5 * (mu0 + mu1);
    double best_distance = std::numeric_limits<double>::infinity();
    bool found = false;
    for (double x1 : roots[0]) {
      for (double x2 : roots[1]) {
        if (x1 == x2) continue;
        const double a = (targets[1] - targets[0]) / (x2 - x1);
        if (!(a > 0.0) || !std::isfinite(a)) continue;
        const double distance = std::abs(x1 - centre) + std::abs(x2 - centre);
        if (distance < best_distance) {
          best_distance = distance;
          out.a = a;
          out.b = targets[0] - a * x1;
          found = true;
        }
      }
    }
    if (found) return out;
  }

  const double pooled = 0.5 * (v0 + v1);
  out.a = (mu1 - mu0) / pooled;
  out.b = base + (mu0 * mu0 - mu1 * mu1) / (2.0 * pooled);
  out.fallback = true;
  return out;
}

namespace {

bool degenerate(const LeafStats& s) {
  return s.n_pos == 0 || s.n_pos == s.n || s.var0 <= kVarianceFloor ||
         s.var1 <= kVarianceFloor;
}

// Appends the calibrated label-conditional score components of one side.
void side_components(const LeafStats& s, double epsilon, Mixture& positive,
                     Mixture& negative) {
  if (s.n == 0) return;
  const double n1 = static_cast<double>(s.n_pos);
  const double n0 = static_cast<double>(s.n - s.n_pos);
  if (degenerate(s)) {
    // Constant transform at the side's positive rate.
    const double v = logit(s.positive_rate());
    positive.push_back({n1, v, 0.0});
    negative.push_back({n0, v, 0.0});
    return;
  }
  const auto pl = gaussian_platt_params(s.mean0, std::sqrt(s.var0), s.mean1,
                                        std::sqrt(s.var1), s.positive_rate(),
                                        epsilon);
  const double scale = std::abs(pl.a);
  positive.push_back(
      {n1, pl.a * s.mean1 + pl.b, scale * std::sqrt(s.var1)});
  negative.push_back(
      {n0, pl.a * s.mean0 + pl.b, scale * std::sqrt(s.var0)});
}

}  // namespace

double gaussian_calibrated_auc(const LeafStats& left, const LeafStats& right,
                               double epsilon) {
  Mixture positive, negative;
  side_components(left, epsilon, positive, negative);
  side_components(right, epsilon, positive, negative);
  double w1 = 0.0, w0 = 0.0;
  for (const auto& c : positive) w1 += c.weight;
  for (const auto& c : negative) w0 += c.weight;
  if (w1 <= 0.0 || w0 <= 0.0) return 0.5;
  return mixture_auc(positive, negative, 1e-7);
}

// ---------------------------------------------------------------------------
// PartitionTree

PartitionTree::PartitionTree(std::vector<TreeNode> nodes, std::size_t arity)
    : nodes_(std::move(nodes)), arity_(arity) {
  if (nodes_.empty()) throw ValidationError("tree has no nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& node = nodes_[i];
    if (node.is_leaf()) {
      ++leaf_count_;
      continue;
    }
    if (static_cast<std::size_t>(node.feature) >= arity_) {
      throw ValidationError("tree node splits on a feature beyond the arity");
    }
    const auto n = static_cast<int>(nodes_.size());
    if (node.left <= static_cast<int>(i) || node.right <= static_cast<int>(i) ||
        node.left >= n || node.right >= n) {
      throw ValidationError("tree node has invalid child indices");
    }
  }
  leaf_index_.assign(leaf_count_, nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].is_leaf()) continue;
    const auto id = nodes_[i].leaf.value;
    if (id >= leaf_count_ || leaf_index_[id] != nodes_.size()) {
      throw ValidationError("leaf partition ids must be 0..L-1 without gaps");
    }
    leaf_index_[id] = i;
  }
}

PartitionId PartitionTree::assign(std::span<const double> features) const {
  if (features.size() != arity_) {
    throw ValidationError("feature arity " + std::to_string(features.size()) +
                          " does not match tree arity " +
                          std::to_string(arity_));
  }
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& node = nodes_[i];
    i = static_cast<std::size_t>(
        features[static_cast<std::size_t>(node.feature)] <= node.threshold
            ? node.left
            : node.right);
  }
  return nodes_[i].leaf;
}

std::vector<PartitionId> PartitionTree::assign_all(const Dataset& data) const {
  std::vector<PartitionId> out;
  out.reserve(data.size());
  for (const auto& ex : data) out.push_back(assign(ex.features));
  return out;
}

std::size_t PartitionTree::depth() const {
  std::function<std::size_t(std::size_t)> rec = [&](std::size_t i) {
    const auto& node = nodes_[i];
    if (node.is_leaf()) return std::size_t{0};
    return 1 + std::max(rec(static_cast<std::size_t>(node.left)),
                        rec(static_cast<std::size_t>(node.right)));
  };
  return rec(0);
}

const TreeNode& PartitionTree::leaf_node(PartitionId id) const {
  if (id.value >= leaf_count_) throw ValidationError("unknown partition id");
  return nodes_[leaf_index_[id.value]];
}

// ---------------------------------------------------------------------------
// Split search

namespace {

double midpoint(double lo, double hi) {
  const double mid = lo + 0.5 * (hi - lo);
  return mid >= hi ? lo : mid;
}

SplitCandidate best_split_for_feature(const Dataset& data,
                                      std::span<const std::size_t> rows,
                                      std::size_t feature,
                                      const TreeConfig& cfg) {
  std::vector<std::pair<double, std::size_t>> sorted;
  sorted.reserve(rows.size());
  for (std::size_t r : rows) sorted.emplace_back(data[r].features[feature], r);
  std::sort(sorted.begin(), sorted.end());

  SplitCandidate best;
  best.feature = feature;
  const std::size_t n = sorted.size();
  const std::size_t min_leaf = std::max<std::size_t>(cfg.min_samples_leaf, 1);

  if (cfg.criterion == SplitCriterion::gini) {
    ClassCounts parent{static_cast<double>(n), 0.0};
    for (const auto& [v, r] : sorted) parent.n_pos += data[r].label;
    ClassCounts left;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left.n += 1.0;
      left.n_pos += data[sorted[i].second].label;
      if (!(sorted[i].first < sorted[i + 1].first)) continue;
      if (i + 1 < min_leaf || n - i - 1 < min_leaf) continue;
      const ClassCounts right{parent.n - left.n, parent.n_pos - left.n_pos};
      const double gain = gini_gain(parent, left, right);
      if (gain > best.score) {
        best.score = gain;
        best.threshold = midpoint(sorted[i].first, sorted[i + 1].first);
      }
    }
    return best;
  }

  ScoreMoments left, right;
  for (const auto& [v, r] : sorted) right.add(data[r].label, data[r].score);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto& ex = data[sorted[i].second];
    left.add(ex.label, ex.score);
    right.remove(ex.label, ex.score);
    if (!(sorted[i].first < sorted[i + 1].first)) continue;
    if (i + 1 < min_leaf || n - i - 1 < min_leaf) continue;
    const double value =
        gaussian_calibrated_auc(left.stats(), right.stats(), cfg.platt_epsilon);
    if (value > best.score) {
      best.score = value;
      best.threshold = midpoint(sorted[i].first, sorted[i + 1].first);
    }
  }
  return best;
}

}  // namespace

std::optional<SplitCandidate> find_best_split(
    const Dataset& data, std::span<const std::size_t> rows,
    std::span<const std::size_t> features, const TreeConfig& cfg,
    Execution exec) {
  std::vector<std::size_t> order(features.begin(), features.end());
  std::sort(order.begin(), order.end());
  std::vector<SplitCandidate> per_feature(order.size());

  const auto m = static_cast<std::ptrdiff_t>(order.size());
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t k = 0; k < m; ++k) {
      per_feature[static_cast<std::size_t>(k)] = best_split_for_feature(
          data, rows, order[static_cast<std::size_t>(k)], cfg);
    }
  } else {
    for (std::ptrdiff_t k = 0; k < m; ++k) {
      per_feature[static_cast<std::size_t>(k)] = best_split_for_feature(
          data, rows, order[static_cast<std::size_t>(k)], cfg);
    }
  }

  std::optional<SplitCandidate> best;
  for (const auto& c : per_feature) {
    if (!std::isfinite(c.score)) continue;
    if (!best || c.score > best->score) best = c;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Tree growth

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const TreeConfig& cfg, Rng* rng,
              Execution exec)
      : data_(data), cfg_(cfg), rng_(rng), exec_(exec) {
    if (cfg.feature_subset.empty()) {
      candidates_.resize(data.arity());
      std::iota(candidates_.begin(), candidates_.end(), 0);
    } else {
      for (std::size_t f : cfg.feature_subset) {
        if (f >= data.arity()) {
          throw ValidationError("feature_subset index beyond dataset arity");
        }
        candidates_.push_back(f);
      }
    }
  }

  PartitionTree build(std::vector<std::size_t> rows) {
    grow(std::move(rows), 0);
    return PartitionTree(std::move(nodes_), data_.arity());
  }

 private:
  std::size_t grow(std::vector<std::size_t> rows, int depth) {
    ScoreMoments moments;
    for (std::size_t r : rows) moments.add(data_[r].label, data_[r].score);

    const std::size_t index = nodes_.size();
    nodes_.emplace_back();
    nodes_[index].stats = moments.stats();

    const auto split = choose_split(rows, depth, nodes_[index].stats);
    if (!split) {
      nodes_[index].leaf = PartitionId{next_leaf_++};
      return index;
    }

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
      (data_[r].features[split->feature] <= split->threshold ? left_rows
                                                             : right_rows)
          .push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    const std::size_t left = grow(std::move(left_rows), depth + 1);
    const std::size_t right = grow(std::move(right_rows), depth + 1);
    auto& node = nodes_[index];
    node.feature = static_cast<int>(split->feature);
    node.threshold = split->threshold;
    node.left = static_cast<int>(left);
    node.right = static_cast<int>(right);
    return index;
  }

  std::optional<SplitCandidate> choose_split(
      const std::vector<std::size_t>& rows, int depth, const LeafStats& stats) {
    if (depth >= cfg_.max_depth) return std::nullopt;
    const std::size_t min_leaf = std::max<std::size_t>(cfg_.min_samples_leaf, 1);
    if (rows.size() < 2 * min_leaf) return std::nullopt;
    if (cfg_.criterion == SplitCriterion::gini &&
        (stats.n_pos == 0 || stats.n_pos == stats.n)) {
      return std::nullopt;
    }

    std::vector<std::size_t> features = candidates_;
    if (rng_ != nullptr && features.size() > 1) {
      const auto k = std::max<std::size_t>(
          1, static_cast<std::size_t>(
                 std::sqrt(static_cast<double>(features.size()))));
      std::shuffle(features.begin(), features.end(), *rng_);
      features.resize(k);
    }
    if (features.empty()) return std::nullopt;

    auto split = find_best_split(data_, rows, features, cfg_, exec_);
    if (!split) return std::nullopt;
    const double baseline =
        cfg_.criterion == SplitCriterion::gini
            ? kGiniImprovement
            : gaussian_calibrated_auc(stats, LeafStats{}, cfg_.platt_epsilon) +
                  kAucImprovement;
    if (!(split->score > baseline)) return std::nullopt;
    return split;
  }

  const Dataset& data_;
  const TreeConfig& cfg_;
  Rng* rng_;
  Execution exec_;
  std::vector<std::size_t> candidates_;
  std::vector<TreeNode> nodes_;
  std::size_t next_leaf_ = 0;
};

void validate(const TreeConfig& cfg) {
  if (cfg.max_depth < 1) throw ValidationError("max_depth must be >= 1");
  if (cfg.min_samples_leaf < 1) {
    throw ValidationError("min_samples_leaf must be >= 1");
  }
}

}  // namespace

PartitionTree fit_tree_on_rows(const Dataset& data,
                               std::span<const std::size_t> rows,
                               const TreeConfig& cfg, Rng* rng,
                               Execution exec) {
  require_nonempty(data, "fit_tree");
  if (rows.empty()) throw ValidationError("fit_tree: no rows");
  validate(cfg);
  TreeBuilder builder(data, cfg, rng, exec);
  return builder.build(std::vector<std::size_t>(rows.begin(), rows.end()));
}

PartitionTree fit_tree(const Dataset& data, const TreeConfig& cfg,
                       Execution exec) {
  require_nonempty(data, "fit_tree");
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), 0);
  return fit_tree_on_rows(data, rows, cfg, nullptr, exec);
}

std::vector<PartitionTree> fit_forest(const Dataset& data,
                                      const TreeConfig& cfg,
                                      std::size_t n_trees, std::uint64_t seed,
                                      Execution exec) {
  require_nonempty(data, "fit_forest");
  if (n_trees < 1) throw ValidationError("fit_forest: n_trees must be >= 1");
  validate(cfg);

  std::vector<PartitionTree> trees(n_trees);
  auto grow_one = [&](std::size_t t) {
    Rng rng = derive_rng(seed, 0x7265, t);
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
    std::vector<std::size_t> rows(data.size());
    for (auto& r : rows) r = pick(rng);
    trees[t] = fit_tree_on_rows(data, rows, cfg, &rng, Execution::serial);
  };

  const auto m = static_cast<std::ptrdiff_t>(n_trees);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t t = 0; t < m; ++t) grow_one(static_cast<std::size_t>(t));
  } else {
    for (std::ptrdiff_t t = 0; t < m; ++t) grow_one(static_cast<std::size_t>(t));
  }
  return trees;
}

}  // namespace hetcal
