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

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace hetcal {

// Identifies one cell Πi of a partition of the feature space.
struct PartitionId {
  std::size_t value = 0;

  auto operator<=>(const PartitionId&) const = default;
};

// One record: features, binary label, and the base model's logit score.
struct LabeledExample {
  std::vector<double> features;
  int label = 0;
  double score = 0.0;
};

enum class DatasetRole { unspecified, train, calibration, test };

// Ordered, immutable collection of examples sharing one feature arity.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<LabeledExample> examples,
                   DatasetRole role = DatasetRole::unspecified,
                   std::vector<std::string> feature_names = {});

  std::size_t size() const noexcept { return examples_.size(); }
  bool empty() const noexcept { return examples_.empty(); }
  std::size_t arity() const noexcept { return arity_; }
  DatasetRole role() const noexcept { return role_; }
  const std::vector<std::string>& feature_names() const noexcept {
    return feature_names_;
  }

  const LabeledExample& operator[](std::size_t i) const { return examples_[i]; }
  auto begin() const noexcept { return examples_.begin(); }
  auto end() const noexcept { return examples_.end(); }
  const std::vector<LabeledExample>& examples() const noexcept {
    return examples_;
  }

  std::vector<double> scores() const;
  std::vector<int> labels() const;
  std::size_t positives() const;

  // Copy of the rows at `indices` (in that order) under a new role.
  Dataset subset(std::span<const std::size_t> indices, DatasetRole role) const;

 private:
  std::vector<LabeledExample> examples_;
  DatasetRole role_ = DatasetRole::unspecified;
  std::vector<std::string> feature_names_;
  std::size_t arity_ = 0;
};

// Throws ValidationError unless the dataset is nonempty.
void require_nonempty(const Dataset& data, const char* what);

enum class ScoreScale { logit, probability };

struct CsvSchema {
  std::string label_column = "label";
  std::string score_column = "score";
  // Probability-scale scores are mapped through logit with clamping.
  ScoreScale scale = ScoreScale::logit;
  // Columns that are neither label, score, nor features (e.g. an appended
  // prediction column).
  std::vector<std::string> ignored_columns;
};

Dataset read_csv(std::istream& in, const CsvSchema& schema = {});
Dataset load_csv(const std::filesystem::path& path,
                 const CsvSchema& schema = {});

// Writes label, score, then features, at 17 significant digits.
void write_csv(std::ostream& out, const Dataset& data,
               const CsvSchema& schema = {});
void write_csv(const std::filesystem::path& path, const Dataset& data,
               const CsvSchema& schema = {});

// One point of a finite joint law over (score, partition, label).
struct Atom {
  double score = 0.0;
  PartitionId partition;
  int label = 0;
  double probability = 0.0;
};

// Probability mass at one (score, partition) key, both as joint mass and as
// label-conditional mass (p0 = P(s, Πi | y=0), p1 = P(s, Πi | y=1)).
struct KeyMass {
  double score = 0.0;
  PartitionId partition;
  double joint0 = 0.0;
  double joint1 = 0.0;
  double p0 = 0.0;
  double p1 = 0.0;
};

class DiscreteDistribution {
 public:
  // Merges duplicate (score, partition, label) atoms. Throws ValidationError
  // on negative or non-finite mass, or total mass off 1 by more than 1e-12.
  explicit DiscreteDistribution(std::vector<Atom> atoms);

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const std::vector<KeyMass>& keys() const noexcept { return keys_; }

  double label_mass(int label) const noexcept {
    return label == 1 ? mass1_ : mass0_;
  }
  bool has_both_labels() const noexcept { return mass0_ > 0 && mass1_ > 0; }
  std::size_t partition_count() const noexcept { return partition_count_; }

  // Same law with partitions relabelled by `map` (old id -> new id) and
  // merged.
  DiscreteDistribution remap_partitions(
      std::span<const std::size_t> map) const;

  // Same law with every atom moved to partition 0.
  DiscreteDistribution collapse_partitions() const;

 private:
  std::vector<Atom> atoms_;
  std::vector<KeyMass> keys_;
  double mass0_ = 0.0;
  double mass1_ = 0.0;
  std::size_t partition_count_ = 0;
};

// Empirical law of a dataset: atom mass = count / n. `assignment[i]` is the
// partition of example i.
DiscreteDistribution empirical_distribution(
    const Dataset& data, std::span<const PartitionId> assignment);
DiscreteDistribution empirical_distribution(const Dataset& data);

struct DatasetSplit {
  Dataset train;
  Dataset calibration;
  Dataset test;
};

// Seeded shuffle into three disjoint parts with sizes round(f0 n),
// round(f1 n), and the remainder. Rows keep their original relative order
// within each part.
DatasetSplit split_dataset(const Dataset& data,
                           const std::array<double, 3>& fractions,
                           std::uint64_t seed);

}  // namespace hetcal
