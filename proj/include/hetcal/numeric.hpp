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

#include <cmath>
#include <functional>
#include <vector>

namespace hetcal {

// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] before entering
// logit space.
inline constexpr double kProbClamp = 1e-12;

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logit(double p);

double normal_cdf(double x);
double normal_pdf(double x, double mean, double sd);

// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth = 50);

// One component of a score law: a Gaussian when sd > 0, a point mass at mean
// when sd == 0.
struct MixtureComponent {
  double weight = 0.0;
  double mean = 0.0;
  double sd = 0.0;
};

using Mixture = std::vector<MixtureComponent>;

// P(S1 > S0) + 1/2 P(S1 = S0) for S1 ~ positive, S0 ~ negative, computed as
// the integral of TPR over the negative law. The continuous part is
// integrated with adaptive Simpson (broken at point masses of the positive
// law); point masses of the negative law are summed exactly.
double mixture_auc(const Mixture& positive, const Mixture& negative,
                   double tol = 1e-9);

}  // namespace hetcal
