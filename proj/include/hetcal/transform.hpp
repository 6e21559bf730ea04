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

#include <map>
#include <memory>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "hetcal/score_model.hpp"

namespace hetcal {

class Transform;

namespace transform {

struct Identity {};

// σ(a·s + b) on logit-scale scores.
struct Platt {
  double a = 1.0;
  double b = 0.0;
};

// Left-constant step function: value[i] applies on [score[i], score[i+1]).
// Scores below the first breakpoint take value[0].
struct Isotonic {
  std::vector<double> scores;
  std::vector<double> values;
};

// edges are interior cut points; bin k covers (edges[k-1], edges[k]].
struct Histogram {
  std::vector<double> edges;
  std::vector<double> values;
};

// Explicit (score, partition) -> value lookup. Unlisted keys map to
// `missing`.
struct Table {
  std::map<std::pair<double, std::size_t>, double> values;
  double missing = 0.0;
};

struct PerPartition;
struct Composed;

}  // namespace transform

// A score transform t(s, Πi). Immutable value type; recursive variants share
// their children.
class Transform {
 public:
  enum class Kind {
    identity,
    platt,
    isotonic,
    histogram,
    table,
    per_partition,
    composed
  };

  Transform() : repr_(transform::Identity{}) {}

  static Transform identity() { return Transform(); }
  static Transform platt(double a, double b);
  static Transform isotonic(std::vector<double> scores,
                            std::vector<double> values);
  static Transform histogram(std::vector<double> edges,
                             std::vector<double> values);
  static Transform table(std::map<std::pair<double, std::size_t>, double> values,
                         double missing = 0.0);
  static Transform per_partition(std::map<std::size_t, Transform> parts,
                                 Transform fallback);
  // Applies inner, then outer on inner's logit-space output.
  static Transform composed(Transform outer, Transform inner);

  Kind kind() const noexcept { return static_cast<Kind>(repr_.index()); }

  double apply(double score, PartitionId partition = {}) const;

  // The transform's output expressed in logit space: a·s+b for Platt, the
  // clamped logit of the stored level for step transforms, the raw score
  // for identity.
  double apply_logit(double score, PartitionId partition = {}) const;

  bool outputs_probability() const;

  const transform::Platt* as_platt() const {
    return std::get_if<transform::Platt>(&repr_);
  }
  const transform::Isotonic* as_isotonic() const {
    return std::get_if<transform::Isotonic>(&repr_);
  }
  const transform::Histogram* as_histogram() const {
    return std::get_if<transform::Histogram>(&repr_);
  }
  const transform::Table* as_table() const {
    return std::get_if<transform::Table>(&repr_);
  }
  const transform::PerPartition* as_per_partition() const;
  const transform::Composed* as_composed() const;

 private:
  using Repr = std::variant<transform::Identity, transform::Platt,
                            transform::Isotonic, transform::Histogram,
                            transform::Table,
                            std::shared_ptr<const transform::PerPartition>,
                            std::shared_ptr<const transform::Composed>>;

  explicit Transform(Repr repr) : repr_(std::move(repr)) {}

  Repr repr_;
};

namespace transform {

struct PerPartition {
  std::map<std::size_t, Transform> parts;
  Transform fallback;
};

struct Composed {
  Transform outer;
  Transform inner;
};

}  // namespace transform

struct PlattOptions {
  double ridge = 1e-6;
  double gradient_tolerance = 1e-10;
  int max_iterations = 100;
  double parameter_bound = 1e3;
};

struct PlattFit {
  double a = 0.0;
  double b = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Newton's method on the mean logistic loss of σ(a·s+b) plus
// ridge/2·(a²+b²). Requires at least two examples.
PlattFit fit_platt_params(std::span<const double> scores,
                          std::span<const int> labels,
                          const PlattOptions& options = {});
Transform fit_platt(std::span<const double> scores, std::span<const int> labels,
                    const PlattOptions& options = {});

// Pool-adjacent-violators least-squares monotone fit.
Transform fit_isotonic(std::span<const double> scores,
                       std::span<const int> labels);

// Equal-frequency binning; bin value is the label mean of the bin.
Transform fit_histogram(std::span<const double> scores,
                        std::span<const int> labels, std::size_t bins);

}  // namespace hetcal
