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

#include <cstdint>
#include <random>

namespace hetcal {

// Every data-parallel kernel takes an Execution tag. The serial path is the
// reference implementation; the parallel path must produce bit-identical
// results.
enum class Execution { serial, parallel };

// Applies the HETCAL_THREADS cap (if set and positive) to the OpenMP runtime.
// Returns the resulting maximum thread count.
int configure_threads_from_env();

int max_threads();

// The single named generator used for all randomness.
using Rng = std::mt19937_64;

// Derives an independent, reproducible generator for a (seed, stream, index)
// triple, so parallel loops can seed per iteration without sharing state.
Rng derive_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

}  // namespace hetcal
