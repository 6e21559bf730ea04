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

#include "hetcal/numeric.hpp"

#include <algorithm>
#include <numbers>

namespace hetcal {

double logit(double p) {
  p = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  return std::log(p) - std::log1p(-p);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double b,
                    double fa, double fm, double fb, double whole, double tol,
                    int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double total_weight(const Mixture& m) {
  double w = 0.0;
  for (const auto& c : m) w += c.weight;
  return w;
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth) {
  if (b <= a) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

double mixture_auc(const Mixture& positive, const Mixture& negative,
                   double tol) {
  const double wpos = total_weight(positive);
  const double wneg = total_weight(negative);

  // Mass of the positive law strictly above t, and exactly at t.
  auto above = [&](double t) {
    double mass = 0.0;
    for (const auto& c : positive) {
      if (c.weight == 0.0) continue;
      if (c.sd > 0.0) {
        mass += c.weight * normal_cdf((c.mean - t) / c.sd);
      } else if (c.mean > t) {
        mass += c.weight;
      }
    }
    return mass / wpos;
  };
  auto at = [&](double t) {
    double mass = 0.0;
    for (const auto& c : positive) {
      if (c.sd == 0.0 && c.mean == t) mass += c.weight;
    }
    return mass / wpos;
  };

  double auc = 0.0;

  std::vector<double> breaks;
  for (const auto& c : negative) {
    if (c.weight == 0.0) continue;
    if (c.sd == 0.0) {
      auc += c.weight / wneg * (above(c.mean) + 0.5 * at(c.mean));
      continue;
    }
    for (double k : {-10.0, -5.0, -2.0, -1.0, 0.0, 1.0, 2.0, 5.0, 10.0}) {
      breaks.push_back(c.mean + k * c.sd);
    }
  }
  if (breaks.empty()) return auc;

  const double lo = *std::min_element(breaks.begin(), breaks.end());
  const double hi = *std::max_element(breaks.begin(), breaks.end());
  for (const auto& c : positive) {
    if (c.sd == 0.0 && c.mean > lo && c.mean < hi) breaks.push_back(c.mean);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  auto integrand = [&](double t) {
    double density = 0.0;
    for (const auto& c : negative) {
      if (c.weight > 0.0 && c.sd > 0.0) {
        density += c.weight * normal_pdf(t, c.mean, c.sd);
      }
    }
    return above(t) * density / wneg;
  };

  const double piece_tol = tol / static_cast<double>(breaks.size());
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    auc += adaptive_simpson(integrand, breaks[i], breaks[i + 1], piece_tol);
  }
  return auc;
}

}  // namespace hetcal
