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

#include <span>
#include <vector>

#include "hetcal/parallel.hpp"
#include "hetcal/score_model.hpp"
#include "hetcal/transform.hpp"

namespace hetcal {

// Threshold on transformed values; q is the fraction of the mass sitting
// exactly at T that counts as predicted positive.
struct RocThreshold {
  double T = 0.0;
  double q = 0.0;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

// Step ROC curve from (0,0) to (1,1); both coordinates non-decreasing.
using RocCurve = std::vector<RocPoint>;

// Exact AUC of a discrete law, ties counted one half. Throws
// ValidationError if either label has no mass.
double auc(const DiscreteDistribution& dist);

// O(n log n) empirical AUC with analytic tie handling; bit-identical to
// pair counting.
double empirical_auc(std::span<const double> scores,
                     std::span<const int> labels);
double empirical_auc(const Dataset& data);

// O(n²) pair-counting AUC, the definition itself. Integer credit makes the
// parallel reduction bit-identical to the serial one.
double pair_count_auc(std::span<const double> scores,
                      std::span<const int> labels,
                      Execution exec = Execution::parallel);

// AUC after a partition-independent transform: partitions are collapsed and
// t is evaluated at partition 0.
double calibrated_auc(const DiscreteDistribution& dist, const Transform& t);

// AUC after t(s, Πi), each atom keeping its own partition.
double partition_calibrated_auc(const DiscreteDistribution& dist,
                                const Transform& t);

RocPoint roc_point(const DiscreteDistribution& dist, const Transform& t,
                   const RocThreshold& th);

// Sweeps every distinct transformed value as a threshold with q = 1, from the
// highest value down. Partition-aware.
RocCurve roc_curve(const DiscreteDistribution& dist, const Transform& t);

// Step curve of raw scores against labels, same construction as roc_curve
// on the empirical law.
RocCurve empirical_roc_curve(std::span<const double> scores,
                             std::span<const int> labels);

double trapezoid_area(const RocCurve& curve);

// Upper envelope of the curve at the given FPR.
double tpr_at_fpr(const RocCurve& curve, double fpr);

// ∫₀¹ x / (x + FPR(TPR⁻¹(x))) dx, integrated in closed form over each
// linear piece of the curve.
double pr_auc(const RocCurve& curve);
double pr_auc(const DiscreteDistribution& dist, const Transform& t);

// Partition log-loss of a probability-valued transform, evaluated per
// (score, partition) key. Returns +inf when t puts zero probability on a
// label that has mass.
double log_loss(const DiscreteDistribution& dist, const Transform& t);

// sqrt(Σ P(key) (t(key) - P(y=1 | key))²) over distinct (score, partition)
// keys; with a single partition this is the sum over distinct scores.
double expected_calibration_error(const DiscreteDistribution& dist,
                                  const Transform& t);

// Empirical ℓ2 calibration error of predicted probabilities over
// equal-mass bins.
double binned_calibration_error(std::span<const double> probabilities,
                                std::span<const int> labels,
                                std::size_t bins = 15);

// Mean log-loss of predicted probabilities (+inf when a prediction of 0 or
// 1 contradicts its label).
double empirical_log_loss(std::span<const double> probabilities,
                          std::span<const int> labels);

namespace detail {

// Partition-calibrated AUC with the tie credit as a parameter. Only the
// property-suite fault injection uses a value other than 0.5.
double partition_auc_with_tie_weight(const DiscreteDistribution& dist,
                                     const Transform& t, double tie_weight);

}  // namespace detail

}  // namespace hetcal
