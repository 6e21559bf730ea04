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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hetcal/parallel.hpp"
#include "hetcal/score_model.hpp"

namespace hetcal {

struct VerifyOptions {
  std::uint64_t seed = 0;
  // Trials per property; 0 keeps each property's default count.
  std::size_t trials = 0;
  std::size_t perturbations = 100;
  // Tie credit used by the AUC evaluators under test. Anything but 0.5 is a
  // deliberately broken build and must make the suite fail.
  double tie_weight = 0.5;
  Execution exec = Execution::parallel;
};

struct Counterexample {
  std::size_t trial = 0;
  std::vector<Atom> atoms;
  // Transform values per key, when the property involves one.
  std::vector<std::pair<std::pair<double, std::size_t>, double>> transform;
  std::vector<std::size_t> coarse_of_fine;
  std::map<std::string, double> values;
};

struct PropertyResult {
  std::string name;
  std::size_t trials = 0;
  std::size_t failures = 0;
  // Lowest-index failing trial.
  std::optional<Counterexample> counterexample;

  bool passed() const noexcept { return failures == 0; }
};

struct VerifyReport {
  std::uint64_t seed = 0;
  std::vector<PropertyResult> properties;

  bool passed() const noexcept;
};

// Property names, in run order.
std::vector<std::string> verify_property_names();

// Runs one property by name (throws ValidationError for unknown names).
PropertyResult run_property(const std::string& name,
                            const VerifyOptions& options);

// Runs the full oracle property suite. Deterministic given options.
VerifyReport run_verify(const VerifyOptions& options);

}  // namespace hetcal
