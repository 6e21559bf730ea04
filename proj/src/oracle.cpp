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

#include "hetcal/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "hetcal/error.hpp"
#include "hetcal/metrics.hpp"
#include "hetcal/numeric.hpp"

namespace hetcal {

namespace {

using KeyTable = std::map<std::pair<double, std::size_t>, double>;

template <typename F>
Transform key_table(const DiscreteDistribution& dist, F value_of) {
  KeyTable values;
  for (const auto& k : dist.keys()) {
    values[{k.score, k.partition.value}] = value_of(k);
  }
  return Transform::table(std::move(values));
}

double ratio_value(double num, double den) {
  return num + den > 0.0 ? num / (num + den) : 0.0;
}

}  // namespace

Transform optimal_transform(const DiscreteDistribution& dist) {
  return key_table(dist,
                   [](const KeyMass& k) { return ratio_value(k.p1, k.p0); });
}

Transform posterior_transform(const DiscreteDistribution& dist) {
  return key_table(
      dist, [](const KeyMass& k) { return ratio_value(k.joint1, k.joint0); });
}

std::size_t fubini_number(std::size_t n) {
  // a(n) = sum_{k=1..n} C(n,k) a(n-k), a(0) = 1.
  std::vector<std::size_t> a(n + 1, 0);
  a[0] = 1;
  for (std::size_t m = 1; m <= n; ++m) {
    std::size_t binom = 1;
    for (std::size_t k = 1; k <= m; ++k) {
      binom = binom * (m - k + 1) / k;
      a[m] += binom * a[m - k];
    }
  }
  return a[n];
}

Transform ordering_transform(const DiscreteDistribution& dist,
                             std::span<const std::size_t> levels) {
  if (levels.size() != dist.keys().size()) {
    throw ValidationError("ordering_transform: one level per key required");
  }
  KeyTable values;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto& k = dist.keys()[i];
    values[{k.score, k.partition.value}] = static_cast<double>(levels[i]);
  }
  return Transform::table(std::move(values));
}

namespace {

// Enumerates surjections keys -> {0..m-1} for every m, i.e. every weak
// ordering exactly once.
class OrderingSearch {
 public:
  OrderingSearch(const DiscreteDistribution& dist, double tie_weight)
      : n_(dist.keys().size()), tie_weight_(tie_weight) {
    for (const auto& k : dist.keys()) {
      p0_.push_back(k.p0);
      p1_.push_back(k.p1);
    }
    levels_.assign(n_, 0);
  }

  BruteForceResult run() {
    best_.max_auc = -1.0;
    for (std::size_t m = 1; m <= n_; ++m) {
      used_.assign(m, 0);
      missing_ = m;
      levels_count_ = m;
      recurse(0);
    }
    return best_;
  }

 private:
  void recurse(std::size_t i) {
    if (i == n_) {
      if (missing_ == 0) evaluate();
      return;
    }
    for (std::size_t l = 0; l < levels_count_; ++l) {
      const bool fresh = used_[l] == 0;
      // Each remaining key can fill at most one unused level.
      if (!fresh && missing_ > n_ - i - 1) continue;
      levels_[i] = l;
      if (fresh) --missing_;
      ++used_[l];
      recurse(i + 1);
      --used_[l];
      if (fresh) ++missing_;
    }
  }

  void evaluate() {
    double area = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (p1_[i] == 0.0) continue;
      double credit = 0.0;
      for (std::size_t j = 0; j < n_; ++j) {
        if (levels_[i] > levels_[j]) {
          credit += p0_[j];
        } else if (levels_[i] == levels_[j]) {
          credit += tie_weight_ * p0_[j];
        }
      }
      area += p1_[i] * credit;
    }
    if (area > best_.max_auc) {
      best_.max_auc = area;
      best_.levels = levels_;
    }
  }

  std::size_t n_;
  double tie_weight_;
  std::vector<double> p0_, p1_;
  std::vector<std::size_t> levels_;
  std::vector<std::size_t> used_;
  std::size_t missing_ = 0;
  std::size_t levels_count_ = 0;
  BruteForceResult best_;
};

// Three-way comparison treating values within relative 1e-12 as equal.
int tolerant_compare(double a, double b) {
  if (std::isinf(a) || std::isinf(b)) {
    if (a == b) return 0;
    return a < b ? -1 : 1;
  }
  if (std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b))) return 0;
  return a < b ? -1 : 1;
}

}  // namespace

BruteForceResult brute_force_max_auc(const DiscreteDistribution& dist,
                                     double tie_weight) {
  if (!dist.has_both_labels()) {
    throw ValidationError("brute_force_max_auc: both labels need mass");
  }
  if (dist.keys().size() > kBruteForceMaxKeys) {
    throw ValidationError("brute_force_max_auc: support of " +
                          std::to_string(dist.keys().size()) +
                          " keys exceeds the limit of " +
                          std::to_string(kBruteForceMaxKeys));
  }
  return OrderingSearch(dist, tie_weight).run();
}

bool check_ordering_equivalence(const DiscreteDistribution& dist) {
  const auto& keys = dist.keys();
  std::vector<double> ratio, posterior;
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto& k = keys[i];
    if (!(k.joint0 + k.joint1 > 0.0)) continue;
    live.push_back(i);
    ratio.push_back(k.p0 == 0.0 ? std::numeric_limits<double>::infinity()
                                : k.p1 / k.p0);
    posterior.push_back(k.joint1 / (k.joint0 + k.joint1));
  }
  for (std::size_t a = 0; a < live.size(); ++a) {
    for (std::size_t b = a + 1; b < live.size(); ++b) {
      if (tolerant_compare(ratio[a], ratio[b]) !=
          tolerant_compare(posterior[a], posterior[b])) {
        return false;
      }
    }
  }
  return true;
}

bool check_refinement_monotonicity(
    const DiscreteDistribution& dist,
    std::span<const std::size_t> coarse_of_fine) {
  if (coarse_of_fine.size() < dist.partition_count()) {
    throw ValidationError("refinement map does not cover every fine cell");
  }
  const auto coarse = dist.remap_partitions(coarse_of_fine);
  const double fine_value =
      partition_calibrated_auc(dist, optimal_transform(dist));
  const double coarse_value =
      partition_calibrated_auc(coarse, optimal_transform(coarse));
  return fine_value >= coarse_value - 1e-12;
}

// ---------------------------------------------------------------------------
// Random instances

namespace {

DiscreteDistribution random_law(Rng& rng, std::size_t partitions,
                                const RandomInstanceOptions& options) {
  constexpr std::size_t kScoreGrid = 6;
  std::uniform_int_distribution<std::size_t> key_count(
      options.min_keys, std::max(options.min_keys, options.max_keys));
  const std::size_t k =
      std::min(key_count(rng), kScoreGrid * std::max<std::size_t>(partitions, 1));

  std::vector<std::pair<double, std::size_t>> slots;
  for (std::size_t p = 0; p < partitions; ++p) {
    for (std::size_t s = 0; s < kScoreGrid; ++s) {
      slots.emplace_back(static_cast<double>(s) - 2.0, p);
    }
  }
  std::shuffle(slots.begin(), slots.end(), rng);
  slots.resize(k);

  std::exponential_distribution<double> gamma1(1.0);
  std::bernoulli_distribution zero(options.zero_probability);
  std::vector<double> mass(2 * k);
  for (auto& m : mass) m = zero(rng) ? 0.0 : gamma1(rng);
  for (std::size_t i = 0; i < k; ++i) {
    if (mass[2 * i] == 0.0 && mass[2 * i + 1] == 0.0) {
      mass[2 * i + std::bernoulli_distribution(0.5)(rng)] = gamma1(rng);
    }
  }
  for (int label = 0; label < 2; ++label) {
    bool any = false;
    for (std::size_t i = 0; i < k; ++i) any = any || mass[2 * i + label] > 0.0;
    if (!any) {
      std::uniform_int_distribution<std::size_t> pick(0, k - 1);
      mass[2 * pick(rng) + static_cast<std::size_t>(label)] = gamma1(rng);
    }
  }
  double total = 0.0;
  for (double m : mass) total += m;

  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < k; ++i) {
    for (int label = 0; label < 2; ++label) {
      const double m = mass[2 * i + static_cast<std::size_t>(label)];
      if (m > 0.0) {
        atoms.push_back({slots[i].first, PartitionId{slots[i].second}, label,
                         m / total});
      }
    }
  }
  return DiscreteDistribution(std::move(atoms));
}

}  // namespace

DiscreteDistribution random_instance(Rng& rng,
                                     const RandomInstanceOptions& options) {
  std::uniform_int_distribution<std::size_t> parts(
      1, std::max<std::size_t>(options.max_partitions, 1));
  return random_law(rng, parts(rng), options);
}

Transform random_table_transform(const DiscreteDistribution& dist, Rng& rng) {
  const bool coarse = std::bernoulli_distribution(0.5)(rng);
  std::uniform_int_distribution<int> grid(0, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  KeyTable values;
  for (const auto& k : dist.keys()) {
    values[{k.score, k.partition.value}] =
        coarse ? 0.25 * grid(rng) : unit(rng);
  }
  return Transform::table(std::move(values));
}

Transform perturbed_posterior(const DiscreteDistribution& dist, Rng& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  KeyTable values;
  for (const auto& k : dist.keys()) {
    const double q = ratio_value(k.joint1, k.joint0);
    values[{k.score, k.partition.value}] = sigmoid(logit(q) + noise(rng));
  }
  return Transform::table(std::move(values));
}

RandomRefinement random_refinement(Rng& rng,
                                   const RandomInstanceOptions& options) {
  std::uniform_int_distribution<std::size_t> parts(
      1, std::max<std::size_t>(options.max_partitions, 1) + 1);
  const std::size_t fine_parts = parts(rng);
  auto fine = random_law(rng, fine_parts, options);
  std::uniform_int_distribution<std::size_t> coarse_parts(1, fine_parts);
  std::uniform_int_distribution<std::size_t> pick(0, coarse_parts(rng) - 1);
  std::vector<std::size_t> map(fine_parts);
  for (auto& c : map) c = pick(rng);
  return {std::move(fine), std::move(map)};
}

}  // namespace hetcal
