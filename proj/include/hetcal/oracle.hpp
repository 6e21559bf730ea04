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
#include <span>
#include <vector>

#include "hetcal/parallel.hpp"
#include "hetcal/score_model.hpp"
#include "hetcal/transform.hpp"

namespace hetcal {

// t*(s, Πi) = p1 / (p0 + p1) on label-conditional masses; 0 where both
// vanish. Returned as a table over the distribution's keys.
Transform optimal_transform(const DiscreteDistribution& dist);

// P(y=1 | s, Πi) from joint masses; the log-loss minimiser. Orders keys the
// same way as optimal_transform.
Transform posterior_transform(const DiscreteDistribution& dist);

inline constexpr std::size_t kBruteForceMaxKeys = 8;

struct BruteForceResult {
  double max_auc = 0.0;
  // levels[k] is the rank of keys()[k] in the best weak ordering (equal
  // levels tie, higher is better).
  std::vector<std::size_t> levels;
};

// Exhaustive maximum of the partition-calibrated AUC over every weak
// ordering of the keys. Throws ValidationError above kBruteForceMaxKeys keys
// or when a label has no mass.
BruteForceResult brute_force_max_auc(const DiscreteDistribution& dist,
                                     double tie_weight = 0.5);

// Number of weak orderings of n items (ordered Bell / Fubini number).
std::size_t fubini_number(std::size_t n);

// Transform assigning each key its level (a table).
Transform ordering_transform(const DiscreteDistribution& dist,
                             std::span<const std::size_t> levels);

// For every key pair with positive total mass, the strict order under the
// likelihood ratio p1/p0 (p0 = 0 counts as +inf) must match the strict order
// under P(y=1 | key). Near-equal values (relative 1e-12) count as ties.
bool check_ordering_equivalence(const DiscreteDistribution& dist);

// dist is on the fine partition; coarse_of_fine[i] names the coarse cell of
// fine cell i. True iff the optimal partition-calibrated AUC on the fine
// partition is at least that on the coarse one (1e-12 slack). Throws
// ValidationError if the map does not cover every fine cell.
bool check_refinement_monotonicity(const DiscreteDistribution& dist,
                                   std::span<const std::size_t> coarse_of_fine);

struct RandomInstanceOptions {
  std::size_t min_keys = 2;
  std::size_t max_keys = 6;
  std::size_t max_partitions = 3;
  // Chance that an individual (key, label) mass is forced to zero.
  double zero_probability = 0.2;
};

// Random law on distinct (score, partition) keys. Scores are drawn from a
// small integer grid so that scores repeat across partitions. Masses come
// from a symmetric Dirichlet(1) with random zeros; both labels always carry
// mass.
DiscreteDistribution random_instance(Rng& rng,
                                     const RandomInstanceOptions& options = {});

// Random key -> value table. Values come from a coarse grid half the time
// (to exercise ties) and from U(0,1) otherwise.
Transform random_table_transform(const DiscreteDistribution& dist, Rng& rng);

// Posterior table with every value moved in logit space by N(0, 1) noise;
// values stay in (0,1).
Transform perturbed_posterior(const DiscreteDistribution& dist, Rng& rng);

struct RandomRefinement {
  DiscreteDistribution fine;
  std::vector<std::size_t> coarse_of_fine;
};

RandomRefinement random_refinement(Rng& rng,
                                   const RandomInstanceOptions& options = {});

}  // namespace hetcal
