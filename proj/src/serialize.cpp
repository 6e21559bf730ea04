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

#include "hetcal/serialize.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "hetcal/error.hpp"
#include "json.hpp"

namespace hetcal {

using nlohmann::json;

namespace {

json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

template <typename T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw SchemaError(std::string("missing JSON field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("bad JSON field '") + key + "': " + e.what());
  }
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }
}

// ---- Transform

json encode(const Transform& t) {
  json j;
  switch (t.kind()) {
    case Transform::Kind::identity:
      j["variant"] = "identity";
      break;
    case Transform::Kind::platt:
      j["variant"] = "platt";
      j["a"] = t.as_platt()->a;
      j["b"] = t.as_platt()->b;
      break;
    case Transform::Kind::isotonic:
      j["variant"] = "isotonic";
      j["scores"] = t.as_isotonic()->scores;
      j["values"] = t.as_isotonic()->values;
      break;
    case Transform::Kind::histogram:
      j["variant"] = "histogram";
      j["edges"] = t.as_histogram()->edges;
      j["values"] = t.as_histogram()->values;
      break;
    case Transform::Kind::table: {
      j["variant"] = "table";
      json entries = json::array();
      for (const auto& [key, value] : t.as_table()->values) {
        entries.push_back(json::array({key.first, key.second, value}));
      }
      j["entries"] = std::move(entries);
      j["missing"] = t.as_table()->missing;
      break;
    }
    case Transform::Kind::per_partition: {
      j["variant"] = "per_partition";
      json parts = json::array();
      for (const auto& [id, part] : t.as_per_partition()->parts) {
        parts.push_back(json{{"partition", id}, {"transform", encode(part)}});
      }
      j["parts"] = std::move(parts);
      j["fallback"] = encode(t.as_per_partition()->fallback);
      break;
    }
    case Transform::Kind::composed:
      j["variant"] = "composed";
      j["outer"] = encode(t.as_composed()->outer);
      j["inner"] = encode(t.as_composed()->inner);
      break;
  }
  return j;
}

Transform decode_transform(const json& j) {
  const auto variant = field<std::string>(j, "variant");
  try {
    if (variant == "identity") return Transform::identity();
    if (variant == "platt") {
      return Transform::platt(field<double>(j, "a"), field<double>(j, "b"));
    }
    if (variant == "isotonic") {
      return Transform::isotonic(field<std::vector<double>>(j, "scores"),
                                 field<std::vector<double>>(j, "values"));
    }
    if (variant == "histogram") {
      return Transform::histogram(field<std::vector<double>>(j, "edges"),
                                  field<std::vector<double>>(j, "values"));
    }
    if (variant == "table") {
      std::map<std::pair<double, std::size_t>, double> values;
      for (const auto& e : field<json>(j, "entries")) {
        if (!e.is_array() || e.size() != 3) {
          throw SchemaError("table entry must be [score, partition, value]");
        }
        values[{e[0].get<double>(), e[1].get<std::size_t>()}] =
            e[2].get<double>();
      }
      return Transform::table(std::move(values), field<double>(j, "missing"));
    }
    if (variant == "per_partition") {
      std::map<std::size_t, Transform> parts;
      for (const auto& p : field<json>(j, "parts")) {
        parts.emplace(field<std::size_t>(p, "partition"),
                      decode_transform(field<json>(p, "transform")));
      }
      return Transform::per_partition(
          std::move(parts), decode_transform(field<json>(j, "fallback")));
    }
    if (variant == "composed") {
      return Transform::composed(decode_transform(field<json>(j, "outer")),
                                 decode_transform(field<json>(j, "inner")));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("bad transform: ") + e.what());
  } catch (const ValidationError& e) {
    throw SchemaError(std::string("bad transform: ") + e.what());
  }
  throw SchemaError("unknown transform variant '" + variant + "'");
}

// ---- Tree

json encode(const LeafStats& s) {
  return json{{"n", s.n},         {"n_pos", s.n_pos}, {"mean0", s.mean0},
              {"var0", s.var0},   {"mean1", s.mean1}, {"var1", s.var1}};
}

LeafStats decode_stats(const json& j) {
  LeafStats s;
  s.n = field<std::size_t>(j, "n");
  s.n_pos = field<std::size_t>(j, "n_pos");
  s.mean0 = field<double>(j, "mean0");
  s.var0 = field<double>(j, "var0");
  s.mean1 = field<double>(j, "mean1");
  s.var1 = field<double>(j, "var1");
  return s;
}

json encode(const PartitionTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes()) {
    json node{{"stats", encode(n.stats)}};
    if (n.is_leaf()) {
      node["leaf"] = n.leaf.value;
    } else {
      node["feature"] = n.feature;
      node["threshold"] = n.threshold;
      node["left"] = n.left;
      node["right"] = n.right;
    }
    nodes.push_back(std::move(node));
  }
  return json{{"arity", tree.arity()}, {"nodes", std::move(nodes)}};
}

PartitionTree decode_tree(const json& j) {
  std::vector<TreeNode> nodes;
  for (const auto& n : field<json>(j, "nodes")) {
    TreeNode node;
    node.stats = decode_stats(field<json>(n, "stats"));
    if (n.contains("leaf")) {
      node.leaf = PartitionId{field<std::size_t>(n, "leaf")};
    } else {
      node.feature = field<int>(n, "feature");
      node.threshold = field<double>(n, "threshold");
      node.left = field<int>(n, "left");
      node.right = field<int>(n, "right");
      if (node.feature < 0) throw SchemaError("split feature must be >= 0");
    }
    nodes.push_back(node);
  }
  try {
    return PartitionTree(std::move(nodes), field<std::size_t>(j, "arity"));
  } catch (const ValidationError& e) {
    throw SchemaError(std::string("bad tree: ") + e.what());
  }
}

// ---- Config

const char* name(SplitCriterion c) {
  return c == SplitCriterion::gini ? "gini" : "auc_gaussian";
}

const char* name(CalibratorKind k) {
  switch (k) {
    case CalibratorKind::platt:
      return "platt";
    case CalibratorKind::isotonic:
      return "isotonic";
    case CalibratorKind::histogram:
      return "histogram";
  }
  return "platt";
}

const char* name(Combination c) {
  switch (c) {
    case Combination::single:
      return "single";
    case Combination::forest_average:
      return "forest_average";
    case Combination::boosted_chain:
      return "boosted_chain";
  }
  return "single";
}

json encode(const HetCalConfig& cfg) {
  return json{{"criterion", name(cfg.tree.criterion)},
              {"max_depth", cfg.tree.max_depth},
              {"min_samples_leaf", cfg.tree.min_samples_leaf},
              {"platt_epsilon", cfg.tree.platt_epsilon},
              {"feature_subset", cfg.tree.feature_subset},
              {"calibrator", name(cfg.calibrator)},
              {"min_calib_samples", cfg.min_calib_samples},
              {"forest_size", cfg.forest_size},
              {"boosted_stages", cfg.boosted_stages},
              {"platt_ridge", cfg.platt_ridge},
              {"histogram_bins", cfg.histogram_bins},
              {"seed", cfg.seed}};
}

HetCalConfig decode_config(const json& j) {
  HetCalConfig cfg;
  const auto criterion = field<std::string>(j, "criterion");
  if (criterion == "gini") {
    cfg.tree.criterion = SplitCriterion::gini;
  } else if (criterion == "auc_gaussian") {
    cfg.tree.criterion = SplitCriterion::auc_gaussian;
  } else {
    throw SchemaError("unknown criterion '" + criterion + "'");
  }
  cfg.tree.max_depth = field<int>(j, "max_depth");
  cfg.tree.min_samples_leaf = field<std::size_t>(j, "min_samples_leaf");
  cfg.tree.platt_epsilon = field<double>(j, "platt_epsilon");
  cfg.tree.feature_subset = field<std::vector<std::size_t>>(j, "feature_subset");
  const auto calibrator = field<std::string>(j, "calibrator");
  if (calibrator == "platt") {
    cfg.calibrator = CalibratorKind::platt;
  } else if (calibrator == "isotonic") {
    cfg.calibrator = CalibratorKind::isotonic;
  } else if (calibrator == "histogram") {
    cfg.calibrator = CalibratorKind::histogram;
  } else {
    throw SchemaError("unknown calibrator '" + calibrator + "'");
  }
  cfg.min_calib_samples = field<std::size_t>(j, "min_calib_samples");
  cfg.forest_size = field<std::size_t>(j, "forest_size");
  cfg.boosted_stages = field<int>(j, "boosted_stages");
  cfg.platt_ridge = field<double>(j, "platt_ridge");
  cfg.histogram_bins = field<std::size_t>(j, "histogram_bins");
  cfg.seed = field<std::uint64_t>(j, "seed");
  return cfg;
}

Combination decode_combination(const std::string& s) {
  if (s == "single") return Combination::single;
  if (s == "forest_average") return Combination::forest_average;
  if (s == "boosted_chain") return Combination::boosted_chain;
  throw SchemaError("unknown combination '" + s + "'");
}

json encode(const MetricSet& m) {
  json roc = json::array();
  for (const auto& p : m.roc) roc.push_back(json::array({p.fpr, p.tpr}));
  return json{{"auc", number(m.auc)},
              {"pr_auc", number(m.pr_auc)},
              {"log_loss", number(m.log_loss)},
              {"ece", number(m.ece)},
              {"roc", std::move(roc)}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string transform_to_json(const Transform& t) { return dump(encode(t)); }

Transform transform_from_json(const std::string& text) {
  return decode_transform(parse(text));
}

std::string tree_to_json(const PartitionTree& tree) {
  return dump(encode(tree));
}

PartitionTree tree_from_json(const std::string& text) {
  return decode_tree(parse(text));
}

std::string config_to_json(const HetCalConfig& cfg) {
  return dump(encode(cfg));
}

HetCalConfig config_from_json(const std::string& text) {
  return decode_config(parse(text));
}

std::string model_to_json(const HeterogeneousCalibrator& hc) {
  json config = encode(hc.config());
  config["combination"] = name(hc.combination());
  json trees = json::array();
  json transforms = json::array();
  for (const auto& s : hc.stages()) {
    trees.push_back(encode(s.tree));
    transforms.push_back(encode(s.transform));
  }
  return dump(json{{"version", kModelVersion},
                   {"config", std::move(config)},
                   {"trees", std::move(trees)},
                   {"transforms", std::move(transforms)},
                   {"fallback", encode(hc.fallback())}});
}

HeterogeneousCalibrator model_from_json(const std::string& text) {
  const json j = parse(text);
  const int version = field<int>(j, "version");
  if (version != kModelVersion) {
    throw SchemaError("unsupported model version " + std::to_string(version));
  }
  const json config = field<json>(j, "config");
  const auto cfg = decode_config(config);
  const auto combination =
      decode_combination(field<std::string>(config, "combination"));
  const auto trees = field<json>(j, "trees");
  const auto transforms = field<json>(j, "transforms");
  if (!trees.is_array() || !transforms.is_array() ||
      trees.size() != transforms.size() || trees.empty()) {
    throw SchemaError("model needs matching, nonempty trees and transforms");
  }
  std::vector<CalibratedStage> stages;
  for (std::size_t k = 0; k < trees.size(); ++k) {
    CalibratedStage s;
    s.tree = decode_tree(trees[k]);
    s.transform = decode_transform(transforms[k]);
    stages.push_back(std::move(s));
  }
  try {
    return HeterogeneousCalibrator(cfg, combination, std::move(stages),
                                   decode_transform(field<json>(j, "fallback")));
  } catch (const ValidationError& e) {
    throw SchemaError(std::string("bad model: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path,
                const HeterogeneousCalibrator& hc) {
  write_file_atomic(path, model_to_json(hc));
}

HeterogeneousCalibrator load_model(const std::filesystem::path& path) {
  return model_from_json(read_file(path));
}

std::string report_to_json(const EvaluationReport& report) {
  json j = encode(report.calibrated);
  j["baseline"] = encode(report.baseline);
  j["auc_lift_percent"] = number(report.auc_lift_percent);
  return dump(j);
}

std::string verify_report_to_json(const VerifyReport& report) {
  json props = json::array();
  for (const auto& p : report.properties) {
    json entry{{"name", p.name},
               {"trials", p.trials},
               {"failures", p.failures},
               {"passed", p.passed()}};
    if (p.counterexample) {
      const auto& c = *p.counterexample;
      json atoms = json::array();
      for (const auto& a : c.atoms) {
        atoms.push_back(json{{"score", a.score},
                             {"partition", a.partition.value},
                             {"label", a.label},
                             {"probability", a.probability}});
      }
      json transform = json::array();
      for (const auto& [key, value] : c.transform) {
        transform.push_back(json::array({key.first, key.second, value}));
      }
      json values = json::object();
      for (const auto& [k, v] : c.values) values[k] = number(v);
      entry["counterexample"] = json{{"trial", c.trial},
                                     {"atoms", std::move(atoms)},
                                     {"transform", std::move(transform)},
                                     {"coarse_of_fine", c.coarse_of_fine},
                                     {"values", std::move(values)}};
    }
    props.push_back(std::move(entry));
  }
  return dump(json{{"seed", report.seed},
                   {"passed", report.passed()},
                   {"properties", std::move(props)}});
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw ValidationError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ValidationError("cannot move output into place at " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace hetcal
