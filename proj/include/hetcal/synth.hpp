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
#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "hetcal/score_model.hpp"

namespace hetcal {

// The toy score law: label-0 base scores ~ N(-1, sigma), label-1 base scores
// ~ N(+1, sigma) (sigma is a standard deviation). Each heterogeneous binary
// feature agrees with the label with probability `accuracy`, independently
// given the label, and shifts the score by its weight. `bias` shifts every
// score.
struct ToyModelSpec {
  double sigma = 2.0;
  double accuracy = 0.75;
  std::vector<double> weights = {0.0};
  double bias = 0.0;
  // Extra U(0,1) features carrying no signal.
  std::size_t noise_features = 1;
};

// Standard deviation that puts the w=1.8 and w=3.6 AUCs near 0.83 and 0.85.
inline constexpr double kToySigma = 2.0;

// n rows with balanced labels. Feature columns: one binary column per
// weight (het0, het1, ...), then the noise columns (noise0, ...). Score =
// base + Σ weight_k x_k + bias.
Dataset gen_heterogeneous(std::size_t n, const ToyModelSpec& spec,
                          std::uint64_t seed);

// Single heterogeneous feature with the default law.
Dataset gen_heterogeneous(std::size_t n, double w, double b,
                          std::uint64_t seed);

// Exact AUC of the toy score law (mixture quadrature).
double true_auc(const ToyModelSpec& spec);

double true_auc_heterogeneous(double w, double b, double sigma = kToySigma);

// One (w, auc) point per grid value.
std::vector<std::pair<double, double>> auc_weight_sweep(
    const std::vector<double>& w_grid, double sigma = kToySigma);

// Writes the sweep as CSV with a `w,auc` header.
void write_sweep_csv(std::ostream& out,
                     const std::vector<std::pair<double, double>>& sweep);

// Train-time score density of the over-confident model: on the side away
// from the other class 4/3·N(s; ±1, 2), on the inner side 2/3·N(s; ±1, 1).
double overconfident_train_density(double s, int label);

struct OverconfidentData {
  Dataset train;
  Dataset test;
  // Rejection-sampler bookkeeping for the train draws.
  std::size_t proposals = 0;
  std::size_t accepted = 0;
};

// Envelope constant of the rejection sampler (proposal N(±1, 2)).
inline constexpr double kOverconfidentEnvelope = 4.0 / 3.0;

// n rows each. Test scores follow the true law N(±1, 2); train scores
// follow overconfident_train_density. Labels are Bernoulli(1/2). No feature
// columns.
OverconfidentData gen_overconfident(std::size_t n, std::uint64_t seed);

}  // namespace hetcal
