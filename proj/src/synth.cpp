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

#include "hetcal/synth.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <string>

#include "hetcal/error.hpp"
#include "hetcal/numeric.hpp"
#include "hetcal/parallel.hpp"

namespace hetcal {

namespace {

void check_spec(const ToyModelSpec& spec) {
  if (!(spec.sigma > 0.0)) throw ValidationError("sigma must be positive");
  if (!(spec.accuracy >= 0.0 && spec.accuracy <= 1.0)) {
    throw ValidationError("accuracy must lie in [0,1]");
  }
  for (double w : spec.weights) {
    if (!std::isfinite(w)) throw ValidationError("weights must be finite");
  }
  if (!std::isfinite(spec.bias)) throw ValidationError("bias must be finite");
}

}  // namespace

Dataset gen_heterogeneous(std::size_t n, const ToyModelSpec& spec,
                          std::uint64_t seed) {
  if (n < 2) throw ValidationError("gen_heterogeneous: n must be >= 2");
  check_spec(spec);
  Rng rng = derive_rng(seed, 0x6865, 0);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution agree(spec.accuracy);
  std::normal_distribution<double> noise(0.0, spec.sigma);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const std::size_t k = spec.weights.size();
  std::vector<std::string> names;
  for (std::size_t j = 0; j < k; ++j) names.push_back("het" + std::to_string(j));
  for (std::size_t j = 0; j < spec.noise_features; ++j) {
    names.push_back("noise" + std::to_string(j));
  }

  std::vector<LabeledExample> rows(n);
  for (auto& ex : rows) {
    ex.label = coin(rng) ? 1 : 0;
    double score = (ex.label == 1 ? 1.0 : -1.0) + noise(rng) + spec.bias;
    ex.features.reserve(k + spec.noise_features);
    for (std::size_t j = 0; j < k; ++j) {
      const int x = agree(rng) ? ex.label : 1 - ex.label;
      ex.features.push_back(x);
      score += spec.weights[j] * x;
    }
    for (std::size_t j = 0; j < spec.noise_features; ++j) {
      ex.features.push_back(unit(rng));
    }
    ex.score = score;
  }
  return Dataset(std::move(rows), DatasetRole::unspecified, std::move(names));
}

Dataset gen_heterogeneous(std::size_t n, double w, double b,
                          std::uint64_t seed) {
  ToyModelSpec spec;
  spec.weights = {w};
  spec.bias = b;
  return gen_heterogeneous(n, spec, seed);
}

double true_auc(const ToyModelSpec& spec) {
  check_spec(spec);
  const std::size_t k = spec.weights.size();
  if (k > 20) throw ValidationError("true_auc: too many heterogeneous features");
  Mixture positive, negative;
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    double shift = spec.bias;
    double w1 = 1.0, w0 = 1.0;
    for (std::size_t j = 0; j < k; ++j) {
      const bool on = (mask >> j) & 1U;
      if (on) shift += spec.weights[j];
      // x = 1 is the label-1 favourable value.
      w1 *= on ? spec.accuracy : 1.0 - spec.accuracy;
      w0 *= on ? 1.0 - spec.accuracy : spec.accuracy;
    }
    if (w1 > 0.0) positive.push_back({w1, 1.0 + shift, spec.sigma});
    if (w0 > 0.0) negative.push_back({w0, -1.0 + shift, spec.sigma});
  }
  return mixture_auc(positive, negative, 1e-10);
}

double true_auc_heterogeneous(double w, double b, double sigma) {
  ToyModelSpec spec;
  spec.sigma = sigma;
  spec.weights = {w};
  spec.bias = b;
  return true_auc(spec);
}

std::vector<std::pair<double, double>> auc_weight_sweep(
    const std::vector<double>& w_grid, double sigma) {
  if (w_grid.empty()) throw ValidationError("auc_weight_sweep: empty grid");
  std::vector<std::pair<double, double>> out(w_grid.size());
  const auto n = static_cast<std::ptrdiff_t>(w_grid.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = {w_grid[k], true_auc_heterogeneous(w_grid[k], 0.0, sigma)};
  }
  return out;
}

void write_sweep_csv(std::ostream& out,
                     const std::vector<std::pair<double, double>>& sweep) {
  out << "w,auc\n";
  char buf[64];
  for (const auto& [w, a] : sweep) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", w, a);
    out << buf;
  }
}

double overconfident_train_density(double s, int label) {
  const double mu = label == 1 ? 1.0 : -1.0;
  const bool outer = label == 1 ? s > mu : s < mu;
  return outer ? 4.0 / 3.0 * normal_pdf(s, mu, 2.0)
               : 2.0 / 3.0 * normal_pdf(s, mu, 1.0);
}

OverconfidentData gen_overconfident(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw ValidationError("gen_overconfident: n must be >= 2");
  OverconfidentData out;
  Rng rng = derive_rng(seed, 0x6f63, 0);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<LabeledExample> train(n), test(n);
  for (auto& ex : train) {
    ex.label = coin(rng) ? 1 : 0;
    const double mu = ex.label == 1 ? 1.0 : -1.0;
    for (;;) {
      const double s = mu + 2.0 * z(rng);
      ++out.proposals;
      const double ratio = overconfident_train_density(s, ex.label) /
                           (kOverconfidentEnvelope * normal_pdf(s, mu, 2.0));
      if (unit(rng) < ratio) {
        ex.score = s;
        ++out.accepted;
        break;
      }
    }
  }
  for (auto& ex : test) {
    ex.label = coin(rng) ? 1 : 0;
    ex.score = (ex.label == 1 ? 1.0 : -1.0) + 2.0 * z(rng);
  }
  out.train = Dataset(std::move(train), DatasetRole::train);
  out.test = Dataset(std::move(test), DatasetRole::test);
  return out;
}

}  // namespace hetcal
