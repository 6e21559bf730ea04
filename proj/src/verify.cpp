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

#include "hetcal/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "hetcal/error.hpp"
#include "hetcal/metrics.hpp"
#include "hetcal/oracle.hpp"

namespace hetcal {

namespace {

constexpr double kTol = 1e-12;

using Trial = std::function<std::optional<Counterexample>(Rng&)>;

struct PropertySpec {
  const char* name;
  std::size_t default_trials;
  std::uint64_t stream;
  std::function<Trial(const VerifyOptions&)> make;
};

Counterexample dump(const DiscreteDistribution& dist) {
  Counterexample c;
  c.atoms = dist.atoms();
  return c;
}

Counterexample dump(const DiscreteDistribution& dist, const Transform& t) {
  auto c = dump(dist);
  for (const auto& k : dist.keys()) {
    c.transform.push_back(
        {{k.score, k.partition.value}, t.apply(k.score, k.partition)});
  }
  return c;
}

// Comparison term T(k1, k2): the evaluator's AUC on the law with all label-1
// mass at k1 and all label-0 mass at k2.
double comparison_term(const KeyMass& k1, const KeyMass& k2,
                       const Transform& t, double tie_weight) {
  DiscreteDistribution pair({{k1.score, k1.partition, 1, 0.5},
                             {k2.score, k2.partition, 0, 0.5}});
  return detail::partition_auc_with_tie_weight(pair, t, tie_weight);
}

const std::vector<PropertySpec>& specs() {
  static const std::vector<PropertySpec> all = {
      {"optimal_transform_attains_brute_force", 1000, 1,
       [](const VerifyOptions& o) -> Trial {
         return [tw = o.tie_weight](Rng& rng) -> std::optional<Counterexample> {
           const auto dist = random_instance(rng);
           const auto t = optimal_transform(dist);
           const double got = detail::partition_auc_with_tie_weight(dist, t, tw);
           const auto best = brute_force_max_auc(dist, tw);
           if (std::abs(got - best.max_auc) <= kTol) return std::nullopt;
           auto c = dump(dist, t);
           c.values = {{"optimal_transform_auc", got},
                       {"brute_force_max_auc", best.max_auc}};
           return c;
         };
       }},
      {"pairwise_terms_sum_to_one", 1000, 2,
       [](const VerifyOptions& o) -> Trial {
         return [tw = o.tie_weight](Rng& rng) -> std::optional<Counterexample> {
           const auto dist = random_instance(rng);
           const auto t = random_table_transform(dist, rng);
           const auto& keys = dist.keys();
           for (std::size_t i = 0; i < keys.size(); ++i) {
             for (std::size_t j = 0; j < keys.size(); ++j) {
               const double sum = comparison_term(keys[i], keys[j], t, tw) +
                                  comparison_term(keys[j], keys[i], t, tw);
               if (std::abs(sum - 1.0) <= kTol) continue;
               auto c = dump(dist, t);
               c.values = {{"key_a", static_cast<double>(i)},
                           {"key_b", static_cast<double>(j)},
                           {"term_sum", sum}};
               return c;
             }
           }
           return std::nullopt;
         };
       }},
      {"ordering_equivalence", 10000, 3,
       [](const VerifyOptions&) -> Trial {
         return [](Rng& rng) -> std::optional<Counterexample> {
           const auto dist = random_instance(rng);
           if (check_ordering_equivalence(dist)) return std::nullopt;
           return dump(dist);
         };
       }},
      {"roc_area_equals_auc", 1000, 4,
       [](const VerifyOptions& o) -> Trial {
         return [tw = o.tie_weight](Rng& rng) -> std::optional<Counterexample> {
           const auto dist = random_instance(rng);
           const auto t = random_table_transform(dist, rng);
           const double area = trapezoid_area(roc_curve(dist, t));
           const double value =
               detail::partition_auc_with_tie_weight(dist, t, tw);
           if (std::abs(area - value) <= kTol) return std::nullopt;
           auto c = dump(dist, t);
           c.values = {{"roc_area", area}, {"auc", value}};
           return c;
         };
       }},
      {"roc_containment_and_pr_auc", 1000, 5,
       [](const VerifyOptions&) -> Trial {
         return [](Rng& rng) -> std::optional<Counterexample> {
           const auto dist = random_instance(rng);
           const auto t = random_table_transform(dist, rng);
           const auto best = roc_curve(dist, optimal_transform(dist));
           const auto other = roc_curve(dist, t);
           std::vector<double> grid;
           for (int i = 0; i <= 100; ++i) grid.push_back(i / 100.0);
           for (const auto& p : best) grid.push_back(p.fpr);
           for (const auto& p : other) grid.push_back(p.fpr);
           for (double x : grid) {
             const double a = tpr_at_fpr(best, x);
             const double b = tpr_at_fpr(other, x);
             if (a >= b - kTol) continue;
             auto c = dump(dist, t);
             c.values = {{"fpr", x}, {"tpr_optimal", a}, {"tpr_other", b}};
             return c;
           }
           const double pa = pr_auc(best);
           const double pb = pr_auc(other);
           if (pa >= pb - kTol) return std::nullopt;
           auto c = dump(dist, t);
           c.values = {{"pr_auc_optimal", pa}, {"pr_auc_other", pb}};
           return c;
         };
       }},
      {"log_loss_optimality", 1000, 6,
       [](const VerifyOptions& o) -> Trial {
         return [n = o.perturbations](Rng& rng) -> std::optional<Counterexample> {
           const auto dist = random_instance(rng);
           const double best = log_loss(dist, posterior_transform(dist));
           for (std::size_t k = 0; k < n; ++k) {
             const auto t = perturbed_posterior(dist, rng);
             const double other = log_loss(dist, t);
             if (best <= other + kTol) continue;
             auto c = dump(dist, t);
             c.values = {{"log_loss_posterior", best},
                         {"log_loss_perturbed", other},
                         {"perturbation", static_cast<double>(k)}};
             return c;
           }
           return std::nullopt;
         };
       }},
      {"refinement_monotonicity", 10000, 7,
       [](const VerifyOptions&) -> Trial {
         return [](Rng& rng) -> std::optional<Counterexample> {
           auto r = random_refinement(rng);
           if (check_refinement_monotonicity(r.fine, r.coarse_of_fine)) {
             return std::nullopt;
           }
           auto c = dump(r.fine);
           c.coarse_of_fine = r.coarse_of_fine;
           return c;
         };
       }},
  };
  return all;
}

PropertyResult run_spec(const PropertySpec& spec, const VerifyOptions& options) {
  PropertyResult result;
  result.name = spec.name;
  result.trials = options.trials > 0 ? options.trials : spec.default_trials;
  const Trial trial = spec.make(options);

  std::vector<std::optional<Counterexample>> outcomes(result.trials);
  auto run_one = [&](std::size_t i) {
    Rng rng = derive_rng(options.seed, spec.stream, i);
    outcomes[i] = trial(rng);
    if (outcomes[i]) outcomes[i]->trial = i;
  };
  const auto n = static_cast<std::ptrdiff_t>(result.trials);
  if (options.exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) run_one(static_cast<std::size_t>(i));
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) run_one(static_cast<std::size_t>(i));
  }

  for (auto& o : outcomes) {
    if (!o) continue;
    ++result.failures;
    if (!result.counterexample) result.counterexample = std::move(o);
  }
  return result;
}

}  // namespace

bool VerifyReport::passed() const noexcept {
  return std::all_of(properties.begin(), properties.end(),
                     [](const PropertyResult& p) { return p.passed(); });
}

std::vector<std::string> verify_property_names() {
  std::vector<std::string> names;
  for (const auto& s : specs()) names.emplace_back(s.name);
  return names;
}

PropertyResult run_property(const std::string& name,
                            const VerifyOptions& options) {
  for (const auto& s : specs()) {
    if (name == s.name) return run_spec(s, options);
  }
  throw ValidationError("unknown property: " + name);
}

VerifyReport run_verify(const VerifyOptions& options) {
  VerifyReport report;
  report.seed = options.seed;
  for (const auto& s : specs()) report.properties.push_back(run_spec(s, options));
  return report;
}

}  // namespace hetcal
