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

#include "hetcal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "hetcal/error.hpp"

namespace hetcal {

namespace {

// Label-conditional mass at one transformed value.
struct Level {
  double value;
  double p0;
  double p1;
};

std::vector<Level> transformed_levels(const DiscreteDistribution& dist,
                                      const Transform& t) {
  std::vector<Level> raw;
  raw.reserve(dist.keys().size());
  for (const auto& k : dist.keys()) {
    raw.push_back({t.apply(k.score, k.partition), k.p0, k.p1});
  }
  std::stable_sort(raw.begin(), raw.end(), [](const Level& x, const Level& y) {
    return x.value < y.value;
  });
  std::vector<Level> levels;
  for (const auto& l : raw) {
    if (!levels.empty() && levels.back().value == l.value) {
      levels.back().p0 += l.p0;
      levels.back().p1 += l.p1;
    } else {
      levels.push_back(l);
    }
  }
  return levels;
}

void require_both_labels(const DiscreteDistribution& dist) {
  if (!dist.has_both_labels()) {
    throw ValidationError("AUC is undefined: distribution has mass on only "
                          "one label");
  }
}

}  // namespace

namespace detail {

double partition_auc_with_tie_weight(const DiscreteDistribution& dist,
                                     const Transform& t, double tie_weight) {
  require_both_labels(dist);
  double below0 = 0.0;
  double area = 0.0;
  for (const auto& l : transformed_levels(dist, t)) {
    area += l.p1 * (below0 + tie_weight * l.p0);
    below0 += l.p0;
  }
  return area;
}

}  // namespace detail

double partition_calibrated_auc(const DiscreteDistribution& dist,
                                const Transform& t) {
  return detail::partition_auc_with_tie_weight(dist, t, 0.5);
}

double auc(const DiscreteDistribution& dist) {
  return partition_calibrated_auc(dist, Transform::identity());
}

double calibrated_auc(const DiscreteDistribution& dist, const Transform& t) {
  return partition_calibrated_auc(dist.collapse_partitions(), t);
}

double empirical_auc(std::span<const double> scores,
                     std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ValidationError("empirical_auc: scores/labels size mismatch");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return scores[i] < scores[j];
  });

  // Twice the pair credit: 2 per strictly ordered pair, 1 per tie.
  std::uint64_t credit = 0;
  std::uint64_t below0 = 0;
  std::uint64_t n0 = 0;
  std::uint64_t n1 = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    std::uint64_t g0 = 0, g1 = 0;
    while (k < order.size() && scores[order[k]] == s) {
      (labels[order[k]] == 1 ? g1 : g0) += 1;
      ++k;
    }
    credit += g1 * (2 * below0 + g0);
    below0 += g0;
    n0 += g0;
    n1 += g1;
  }
  if (n0 == 0 || n1 == 0) {
    throw ValidationError("AUC is undefined: data has only one label");
  }
  return static_cast<double>(credit) / (2.0 * static_cast<double>(n0) *
                                        static_cast<double>(n1));
}

double pair_count_auc(std::span<const double> scores,
                      std::span<const int> labels, Execution exec) {
  if (scores.size() != labels.size()) {
    throw ValidationError("pair_count_auc: scores/labels size mismatch");
  }
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (labels[i] == 1 ? pos : neg).push_back(scores[i]);
  }
  if (pos.empty() || neg.empty()) {
    throw ValidationError("AUC is undefined: data has only one label");
  }
  const auto np = static_cast<std::ptrdiff_t>(pos.size());
  std::uint64_t credit = 0;
  auto row = [&](std::ptrdiff_t i) {
    std::uint64_t c = 0;
    const double s = pos[static_cast<std::size_t>(i)];
    for (double t : neg) c += s > t ? 2 : (s == t ? 1 : 0);
    return c;
  };
  if (exec == Execution::parallel) {
#pragma omp parallel for reduction(+ : credit) schedule(static)
    for (std::ptrdiff_t i = 0; i < np; ++i) credit += row(i);
  } else {
    for (std::ptrdiff_t i = 0; i < np; ++i) credit += row(i);
  }
  return static_cast<double>(credit) /
         (2.0 * static_cast<double>(pos.size()) *
          static_cast<double>(neg.size()));
}

double empirical_auc(const Dataset& data) {
  const auto s = data.scores();
  const auto y = data.labels();
  return empirical_auc(s, y);
}

RocPoint roc_point(const DiscreteDistribution& dist, const Transform& t,
                   const RocThreshold& th) {
  RocPoint pt;
  for (const auto& k : dist.keys()) {
    const double v = t.apply(k.score, k.partition);
    const double credit = v > th.T ? 1.0 : (v == th.T ? th.q : 0.0);
    pt.fpr += credit * k.p0;
    pt.tpr += credit * k.p1;
  }
  return pt;
}

RocCurve roc_curve(const DiscreteDistribution& dist, const Transform& t) {
  require_both_labels(dist);
  const auto levels = transformed_levels(dist, t);
  RocCurve curve;
  curve.reserve(levels.size() + 1);
  curve.push_back({0.0, 0.0});
  double f = 0.0;
  double tp = 0.0;
  for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
    f += it->p0;
    tp += it->p1;
    // Accumulated mass can overshoot 1 by an ulp.
    curve.push_back({std::min(f, 1.0), std::min(tp, 1.0)});
  }
  curve.back() = {1.0, 1.0};
  return curve;
}

RocCurve empirical_roc_curve(std::span<const double> scores,
                             std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ValidationError("empirical_roc_curve: scores/labels size mismatch");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return scores[i] > scores[j];
  });
  double n0 = 0.0, n1 = 0.0;
  for (int y : labels) (y == 1 ? n1 : n0) += 1.0;
  if (n0 == 0.0 || n1 == 0.0) {
    throw ValidationError("ROC is undefined: data has only one label");
  }
  RocCurve curve{{0.0, 0.0}};
  double c0 = 0.0, c1 = 0.0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    while (k < order.size() && scores[order[k]] == s) {
      (labels[order[k]] == 1 ? c1 : c0) += 1.0;
      ++k;
    }
    curve.push_back({c0 / n0, c1 / n1});
  }
  curve.back() = {1.0, 1.0};
  return curve;
}

double trapezoid_area(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].fpr - curve[i - 1].fpr) *
            (curve[i].tpr + curve[i - 1].tpr) * 0.5;
  }
  return area;
}

double tpr_at_fpr(const RocCurve& curve, double fpr) {
  fpr = std::clamp(fpr, 0.0, 1.0);
  double best = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const auto& a = curve[i - 1];
    const auto& b = curve[i];
    if (fpr < a.fpr || fpr > b.fpr) continue;
    double tpr;
    if (b.fpr == a.fpr) {
      tpr = std::max(a.tpr, b.tpr);
    } else {
      tpr = a.tpr + (fpr - a.fpr) / (b.fpr - a.fpr) * (b.tpr - a.tpr);
    }
    best = std::max(best, tpr);
  }
  return best;
}

double pr_auc(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const auto& a = curve[i - 1];
    const auto& b = curve[i];
    const double dt = b.tpr - a.tpr;
    if (!(dt > 0.0)) continue;
    // On this piece FPR = alpha + beta·x, so the integrand is x/(c·x + alpha).
    const double beta = (b.fpr - a.fpr) / dt;
    const double alpha = a.fpr - beta * a.tpr;
    const double c = 1.0 + beta;
    double piece = dt / c;
    if (alpha != 0.0) {
      piece -= alpha / (c * c) * std::log((b.tpr + b.fpr) / (a.tpr + a.fpr));
    }
    area += piece;
  }
  return area;
}

double pr_auc(const DiscreteDistribution& dist, const Transform& t) {
  return pr_auc(roc_curve(dist, t));
}

double log_loss(const DiscreteDistribution& dist, const Transform& t) {
  double loss = 0.0;
  for (const auto& k : dist.keys()) {
    const double p = std::clamp(t.apply(k.score, k.partition), 0.0, 1.0);
    if (k.joint1 > 0.0) {
      if (p <= 0.0) return std::numeric_limits<double>::infinity();
      loss -= k.joint1 * std::log(p);
    }
    if (k.joint0 > 0.0) {
      if (p >= 1.0) return std::numeric_limits<double>::infinity();
      loss -= k.joint0 * std::log1p(-p);
    }
  }
  return loss;
}

double expected_calibration_error(const DiscreteDistribution& dist,
                                  const Transform& t) {
  double sum = 0.0;
  for (const auto& k : dist.keys()) {
    const double mass = k.joint0 + k.joint1;
    if (mass <= 0.0) continue;
    const double gap = t.apply(k.score, k.partition) - k.joint1 / mass;
    sum += mass * gap * gap;
  }
  return std::sqrt(sum);
}

double binned_calibration_error(std::span<const double> probabilities,
                                std::span<const int> labels,
                                std::size_t bins) {
  if (probabilities.size() != labels.size() || probabilities.empty()) {
    throw ValidationError("binned_calibration_error: bad input sizes");
  }
  if (bins < 1) throw ValidationError("binned_calibration_error: bins >= 1");
  std::vector<std::size_t> order(probabilities.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return probabilities[i] < probabilities[j];
  });
  const std::size_t n = order.size();
  double sum = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    const std::size_t lo = b * n / bins;
    const std::size_t hi = (b + 1) * n / bins;
    if (hi <= lo) continue;
    double mean_p = 0.0, mean_y = 0.0;
    for (std::size_t k = lo; k < hi; ++k) {
      mean_p += probabilities[order[k]];
      mean_y += labels[order[k]];
    }
    const double m = static_cast<double>(hi - lo);
    const double gap = (mean_p - mean_y) / m;
    sum += m / static_cast<double>(n) * gap * gap;
  }
  return std::sqrt(sum);
}

double empirical_log_loss(std::span<const double> probabilities,
                          std::span<const int> labels) {
  if (probabilities.size() != labels.size() || probabilities.empty()) {
    throw ValidationError("empirical_log_loss: bad input sizes");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const double p = std::clamp(probabilities[i], 0.0, 1.0);
    const double q = labels[i] == 1 ? p : 1.0 - p;
    if (q <= 0.0) return std::numeric_limits<double>::infinity();
    loss -= std::log(q);
  }
  return loss / static_cast<double>(probabilities.size());
}

}  // namespace hetcal
