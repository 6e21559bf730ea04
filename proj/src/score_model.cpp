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

#include "hetcal/score_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <tuple>

#include "hetcal/error.hpp"
#include "hetcal/numeric.hpp"
#include "hetcal/parallel.hpp"

namespace hetcal {

Dataset::Dataset(std::vector<LabeledExample> examples, DatasetRole role,
                 std::vector<std::string> feature_names)
    : examples_(std::move(examples)),
      role_(role),
      feature_names_(std::move(feature_names)) {
  arity_ = examples_.empty() ? feature_names_.size()
                             : examples_.front().features.size();
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    const auto& ex = examples_[i];
    if (ex.label != 0 && ex.label != 1) {
      throw ValidationError("example " + std::to_string(i) +
                            ": label must be 0 or 1, got " +
                            std::to_string(ex.label));
    }
    if (!std::isfinite(ex.score)) {
      throw ValidationError("example " + std::to_string(i) +
                            ": score is not finite");
    }
    if (ex.features.size() != arity_) {
      throw ValidationError("example " + std::to_string(i) + ": has " +
                            std::to_string(ex.features.size()) +
                            " features, expected " + std::to_string(arity_));
    }
  }
  if (feature_names_.empty()) {
    for (std::size_t j = 0; j < arity_; ++j) {
      feature_names_.push_back("f" + std::to_string(j));
    }
  } else if (feature_names_.size() != arity_) {
    throw ValidationError("feature name count does not match arity");
  }
}

std::vector<double> Dataset::scores() const {
  std::vector<double> out;
  out.reserve(examples_.size());
  for (const auto& ex : examples_) out.push_back(ex.score);
  return out;
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(examples_.size());
  for (const auto& ex : examples_) out.push_back(ex.label);
  return out;
}

std::size_t Dataset::positives() const {
  return static_cast<std::size_t>(
      std::count_if(examples_.begin(), examples_.end(),
                    [](const LabeledExample& ex) { return ex.label == 1; }));
}

Dataset Dataset::subset(std::span<const std::size_t> indices,
                        DatasetRole role) const {
  std::vector<LabeledExample> rows;
  rows.reserve(indices.size());
  for (std::size_t i : indices) rows.push_back(examples_.at(i));
  return Dataset(std::move(rows), role, feature_names_);
}

void require_nonempty(const Dataset& data, const char* what) {
  if (data.empty()) {
    throw ValidationError(std::string(what) + ": dataset is empty");
  }
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

double parse_number(std::string_view cell, std::size_t row,
                    const std::string& column) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
    throw ParseError("row " + std::to_string(row) + ", column '" + column +
                         "': cannot parse '" + std::string(cell) +
                         "' as a number",
                     row);
  }
  return value;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Dataset read_csv(std::istream& in, const CsvSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("CSV input has no header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    line.erase(0, 3);
  }
  const auto header = split_fields(line);
  std::vector<std::string> names(header.begin(), header.end());

  auto find_column = [&](const std::string& name) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
      throw SchemaError("missing required column '" + name + "'");
    }
    return static_cast<std::size_t>(it - names.begin());
  };
  const std::size_t label_col = find_column(schema.label_column);
  const std::size_t score_col = find_column(schema.score_column);

  std::vector<std::size_t> feature_cols;
  std::vector<std::string> feature_names;
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (j == label_col || j == score_col) continue;
    if (std::find(schema.ignored_columns.begin(), schema.ignored_columns.end(),
                  names[j]) != schema.ignored_columns.end()) {
      continue;
    }
    feature_cols.push_back(j);
    feature_names.push_back(names[j]);
  }

  std::vector<LabeledExample> rows;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_fields(line);
    if (fields.size() != names.size()) {
      throw ParseError("row " + std::to_string(row) + ": expected " +
                           std::to_string(names.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       row);
    }
    LabeledExample ex;
    const double label = parse_number(fields[label_col], row, names[label_col]);
    if (label != 0.0 && label != 1.0) {
      throw ValidationError("row " + std::to_string(row) +
                            ": label must be 0 or 1, got '" +
                            std::string(fields[label_col]) + "'");
    }
    ex.label = static_cast<int>(label);
    double score = parse_number(fields[score_col], row, names[score_col]);
    if (!std::isfinite(score)) {
      throw ValidationError("row " + std::to_string(row) +
                            ": score is not finite");
    }
    if (schema.scale == ScoreScale::probability) {
      if (score < 0.0 || score > 1.0) {
        throw ValidationError("row " + std::to_string(row) +
                              ": probability score outside [0,1]");
      }
      score = logit(score);
    }
    ex.score = score;
    ex.features.reserve(feature_cols.size());
    for (std::size_t j : feature_cols) {
      ex.features.push_back(parse_number(fields[j], row, names[j]));
    }
    rows.push_back(std::move(ex));
  }
  return Dataset(std::move(rows), DatasetRole::unspecified,
                 std::move(feature_names));
}

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open '" + path.string() + "'");
  return read_csv(in, schema);
}

void write_csv(std::ostream& out, const Dataset& data,
               const CsvSchema& schema) {
  out << schema.label_column << ',' << schema.score_column;
  for (const auto& name : data.feature_names()) out << ',' << name;
  out << '\n';
  for (const auto& ex : data) {
    const double score =
        schema.scale == ScoreScale::probability ? sigmoid(ex.score) : ex.score;
    out << ex.label << ',' << format_double(score);
    for (double f : ex.features) out << ',' << format_double(f);
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Dataset& data,
               const CsvSchema& schema) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  write_csv(out, data, schema);
}

// ---------------------------------------------------------------------------
// DiscreteDistribution

DiscreteDistribution::DiscreteDistribution(std::vector<Atom> atoms) {
  using Key = std::tuple<double, std::size_t, int>;
  std::map<Key, double> merged;
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!std::isfinite(a.probability) || a.probability < 0.0) {
      throw ValidationError("atom probability must be finite and >= 0");
    }
    if (!std::isfinite(a.score)) {
      throw ValidationError("atom score must be finite");
    }
    if (a.label != 0 && a.label != 1) {
      throw ValidationError("atom label must be 0 or 1");
    }
    merged[{a.score, a.partition.value, a.label}] += a.probability;
    total += a.probability;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ValidationError("atom probabilities sum to " +
                          std::to_string(total) + ", expected 1");
  }

  atoms_.reserve(merged.size());
  for (const auto& [key, p] : merged) {
    const auto& [score, part, label] = key;
    atoms_.push_back({score, PartitionId{part}, label, p});
    (label == 1 ? mass1_ : mass0_) += p;
    partition_count_ = std::max(partition_count_, part + 1);
  }

  for (const auto& a : atoms_) {
    if (keys_.empty() || keys_.back().score != a.score ||
        keys_.back().partition != a.partition) {
      keys_.push_back({a.score, a.partition, 0.0, 0.0, 0.0, 0.0});
    }
    (a.label == 1 ? keys_.back().joint1 : keys_.back().joint0) +=
        a.probability;
  }
  for (auto& k : keys_) {
    k.p0 = mass0_ > 0 ? k.joint0 / mass0_ : 0.0;
    k.p1 = mass1_ > 0 ? k.joint1 / mass1_ : 0.0;
  }
}

DiscreteDistribution DiscreteDistribution::remap_partitions(
    std::span<const std::size_t> map) const {
  std::vector<Atom> out = atoms_;
  for (auto& a : out) {
    if (a.partition.value >= map.size()) {
      throw ValidationError("partition map does not cover partition " +
                            std::to_string(a.partition.value));
    }
    a.partition = PartitionId{map[a.partition.value]};
  }
  return DiscreteDistribution(std::move(out));
}

DiscreteDistribution DiscreteDistribution::collapse_partitions() const {
  std::vector<std::size_t> map(partition_count_, 0);
  return remap_partitions(map);
}

DiscreteDistribution empirical_distribution(
    const Dataset& data, std::span<const PartitionId> assignment) {
  require_nonempty(data, "empirical_distribution");
  if (assignment.size() != data.size()) {
    throw ValidationError("empirical_distribution: assignment size mismatch");
  }
  using Key = std::tuple<double, std::size_t, int>;
  std::map<Key, std::size_t> counts;
  for (std::size_t i = 0; i < data.size(); ++i) {
    ++counts[{data[i].score, assignment[i].value, data[i].label}];
  }
  const double n = static_cast<double>(data.size());
  std::vector<Atom> atoms;
  atoms.reserve(counts.size());
  for (const auto& [key, c] : counts) {
    const auto& [score, part, label] = key;
    atoms.push_back({score, PartitionId{part}, label,
                     static_cast<double>(c) / n});
  }
  return DiscreteDistribution(std::move(atoms));
}

DiscreteDistribution empirical_distribution(const Dataset& data) {
  std::vector<PartitionId> assignment(data.size());
  return empirical_distribution(data, assignment);
}

DatasetSplit split_dataset(const Dataset& data,
                           const std::array<double, 3>& fractions,
                           std::uint64_t seed) {
  for (double f : fractions) {
    if (!(f > 0.0)) throw ValidationError("split fractions must be positive");
  }
  if (std::abs(fractions[0] + fractions[1] + fractions[2] - 1.0) > 1e-9) {
    throw ValidationError("split fractions must sum to 1");
  }
  const std::size_t n = data.size();
  const auto n_train =
      static_cast<std::size_t>(std::llround(fractions[0] * static_cast<double>(n)));
  const auto n_calib =
      static_cast<std::size_t>(std::llround(fractions[1] * static_cast<double>(n)));
  if (n_train == 0 || n_calib == 0 || n_train + n_calib >= n) {
    throw ValidationError("split fractions yield an empty split for " +
                          std::to_string(n) + " rows");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  auto part = [&](std::size_t from, std::size_t to, DatasetRole role) {
    std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(from),
                                 order.begin() + static_cast<std::ptrdiff_t>(to));
    std::sort(idx.begin(), idx.end());
    return data.subset(idx, role);
  };
  return {part(0, n_train, DatasetRole::train),
          part(n_train, n_train + n_calib, DatasetRole::calibration),
          part(n_train + n_calib, n, DatasetRole::test)};
}

}  // namespace hetcal
