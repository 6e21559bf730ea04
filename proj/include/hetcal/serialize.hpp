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

#include <filesystem>
#include <string>

#include "hetcal/partitioner.hpp"
#include "hetcal/pipeline.hpp"
#include "hetcal/transform.hpp"
#include "hetcal/verify.hpp"

namespace hetcal {

// All JSON written here has sorted keys and shortest round-trip doubles, so
// every value reads back bit-exactly. Malformed documents raise SchemaError.

inline constexpr int kModelVersion = 1;

std::string transform_to_json(const Transform& t);
Transform transform_from_json(const std::string& text);

std::string tree_to_json(const PartitionTree& tree);
PartitionTree tree_from_json(const std::string& text);

std::string config_to_json(const HetCalConfig& cfg);
HetCalConfig config_from_json(const std::string& text);

// {version, config, trees, transforms, fallback}.
std::string model_to_json(const HeterogeneousCalibrator& hc);
HeterogeneousCalibrator model_from_json(const std::string& text);

void save_model(const std::filesystem::path& path,
                const HeterogeneousCalibrator& hc);
HeterogeneousCalibrator load_model(const std::filesystem::path& path);

// {auc, pr_auc, log_loss, ece, roc, baseline, auc_lift_percent}; an infinite
// log-loss is written as the string "inf".
std::string report_to_json(const EvaluationReport& report);

std::string verify_report_to_json(const VerifyReport& report);

// Writes via a temporary sibling file and rename.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace hetcal
