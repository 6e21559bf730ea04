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

#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hetcal/error.hpp"
#include "hetcal/parallel.hpp"
#include "hetcal/pipeline.hpp"
#include "hetcal/serialize.hpp"
#include "hetcal/synth.hpp"
#include "hetcal/verify.hpp"

namespace hetcal::cli {

namespace {

struct FitArgs {
  std::string train, calib, out;
  std::string criterion = "gini";
  std::string calibrator = "platt";
  std::string scale = "logit";
  int max_depth = 3;
  std::size_t min_samples_leaf = 1000;
  std::size_t min_calib_samples = 50;
  std::size_t forest_size = 0;
  int boosted_stages = 1;
  double platt_ridge = 1e-6;
  double platt_epsilon = 0.1;
  std::size_t histogram_bins = 10;
  std::uint64_t seed = 0;
};

struct ApplyArgs {
  std::string model, data, out;
  std::string scale = "logit";
};

struct ReportArgs {
  std::string data, out;
  std::string prob_column = "calibrated_prob";
  std::string baseline_column;
  std::string scale = "logit";
};

struct SynthArgs {
  std::string kind = "heterogeneous";
  std::string out, test_out;
  std::size_t n = 10000;
  std::vector<double> weights = {1.8};
  double bias = -0.9;
  double sigma = kToySigma;
  std::size_t noise_features = 1;
  double w_min = 0.0, w_max = 6.0, w_step = 0.2;
  std::uint64_t seed = 0;
};

struct VerifyArgs {
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::string out;
  bool inject_tie_fault = false;
};

const std::map<std::string, ScoreScale> kScales = {
    {"logit", ScoreScale::logit}, {"probability", ScoreScale::probability}};

CsvSchema schema_for(const std::string& scale) {
  CsvSchema s;
  s.scale = kScales.at(scale);
  return s;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
    s.pop_back();
  }
  return s;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  HetCalConfig cfg;
  cfg.tree.criterion = a.criterion == "gini" ? SplitCriterion::gini
                                             : SplitCriterion::auc_gaussian;
  cfg.tree.max_depth = a.max_depth;
  cfg.tree.min_samples_leaf = a.min_samples_leaf;
  cfg.tree.platt_epsilon = a.platt_epsilon;
  cfg.calibrator = a.calibrator == "platt"      ? CalibratorKind::platt
                   : a.calibrator == "isotonic" ? CalibratorKind::isotonic
                                                : CalibratorKind::histogram;
  cfg.min_calib_samples = a.min_calib_samples;
  cfg.forest_size = a.forest_size;
  cfg.boosted_stages = a.boosted_stages;
  cfg.platt_ridge = a.platt_ridge;
  cfg.histogram_bins = a.histogram_bins;
  cfg.seed = a.seed;
  validate_config(cfg);

  const auto schema = schema_for(a.scale);
  Dataset train = load_csv(a.train, schema);
  // Without a distinct calibration file the training rows are reused.
  Dataset calib = a.calib.empty() ? train : load_csv(a.calib, schema);
  if (train.empty()) throw ValidationError(a.train + ": no data rows");
  if (calib.empty()) throw ValidationError(a.calib + ": no data rows");

  const auto hc = fit(train, calib, cfg);
  save_model(a.out, hc);

  for (std::size_t k = 0; k < hc.stages().size(); ++k) {
    const auto& s = hc.stages()[k];
    for (std::size_t l = 0; l < s.calib_counts.size(); ++l) {
      err << "stage " << k << " leaf " << l << ": " << s.calib_counts[l]
          << " calibration rows" << (s.used_fallback[l] ? ", fallback" : "")
          << "\n";
    }
  }
  out << "wrote " << a.out << "\n";
  return kExitOk;
}

int cmd_apply(const ApplyArgs& a, std::ostream& out) {
  const auto hc = load_model(a.model);
  CsvSchema schema = schema_for(a.scale);
  schema.ignored_columns = {"calibrated_prob"};
  const Dataset data = load_csv(a.data, schema);
  if (!data.empty() && data.arity() != hc.arity()) {
    throw ValidationError(a.data + ": feature arity " +
                          std::to_string(data.arity()) +
                          " does not match model arity " +
                          std::to_string(hc.arity()));
  }
  const auto probs = hc.predict_batch(data);

  std::istringstream in(read_file(a.data));
  std::string line;
  std::getline(in, line);
  std::string result = trim(line) + ",calibrated_prob\n";
  std::size_t row = 0;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    result += line + "," + format_double(probs.at(row++)) + "\n";
  }
  write_file_atomic(a.out, result);
  out << "wrote " << a.out << " (" << row << " rows)\n";
  return kExitOk;
}

std::vector<double> column_values(const std::string& path,
                                  const std::string& column,
                                  const std::string& scale) {
  CsvSchema s = schema_for(scale);
  s.score_column = column;
  s.scale = ScoreScale::logit;  // raw values, no conversion
  s.ignored_columns = {"score"};
  return load_csv(path, s).scores();
}

int cmd_report(const ReportArgs& a, std::ostream& out) {
  CsvSchema schema = schema_for(a.scale);
  schema.ignored_columns = {a.prob_column};
  if (!a.baseline_column.empty()) {
    schema.ignored_columns.push_back(a.baseline_column);
  }
  const Dataset data = load_csv(a.data, schema);
  if (data.empty()) throw ValidationError(a.data + ": no data rows");
  const auto calibrated = column_values(a.data, a.prob_column, a.scale);
  auto scores = data.scores();
  if (!a.baseline_column.empty()) {
    // σ(logit p) reproduces p, so the baseline enters as logits.
    const auto base = column_values(a.data, a.baseline_column, a.scale);
    for (std::size_t i = 0; i < base.size(); ++i) {
      scores[i] = std::log(base[i]) - std::log1p(-base[i]);
    }
  }
  const auto labels = data.labels();
  const auto report = evaluate_probabilities(calibrated, scores, labels);
  write_file_atomic(a.out, report_to_json(report));
  out << "auc " << format_double(report.calibrated.auc) << " baseline "
      << format_double(report.baseline.auc) << " lift "
      << format_double(report.auc_lift_percent) << "%\n";
  return kExitOk;
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  if (a.kind == "sweep") {
    if (!(a.w_step > 0.0) || a.w_max < a.w_min) {
      throw ValidationError("sweep needs w-step > 0 and w-max >= w-min");
    }
    std::vector<double> grid;
    const auto steps =
        static_cast<std::size_t>(std::floor((a.w_max - a.w_min) / a.w_step + 1e-9));
    for (std::size_t i = 0; i <= steps; ++i) {
      grid.push_back(a.w_min + static_cast<double>(i) * a.w_step);
    }
    std::ostringstream ss;
    write_sweep_csv(ss, auc_weight_sweep(grid, a.sigma));
    write_file_atomic(a.out, ss.str());
  } else if (a.kind == "heterogeneous") {
    ToyModelSpec spec;
    spec.sigma = a.sigma;
    spec.weights = a.weights;
    spec.bias = a.bias;
    spec.noise_features = a.noise_features;
    std::ostringstream ss;
    write_csv(ss, gen_heterogeneous(a.n, spec, a.seed));
    write_file_atomic(a.out, ss.str());
  } else {
    if (a.test_out.empty()) {
      throw ValidationError("--test-out is required for the overconfident kind");
    }
    const auto data = gen_overconfident(a.n, a.seed);
    std::ostringstream train, test;
    write_csv(train, data.train);
    write_csv(test, data.test);
    write_file_atomic(a.out, train.str());
    write_file_atomic(a.test_out, test.str());
  }
  out << "wrote " << a.out << "\n";
  return kExitOk;
}

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  VerifyOptions opt;
  opt.seed = a.seed;
  opt.trials = a.trials;
  if (a.inject_tie_fault) opt.tie_weight = 1.0;
  const auto report = run_verify(opt);
  const auto text = verify_report_to_json(report);
  if (!a.out.empty()) write_file_atomic(a.out, text);
  for (const auto& p : report.properties) {
    out << (p.passed() ? "PASS " : "FAIL ") << p.name << " (" << p.failures
        << "/" << p.trials << " failing)\n";
  }
  return report.passed() ? kExitOk : kExitPropertyFailure;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  configure_threads_from_env();

  CLI::App app{"Heterogeneous calibration toolkit"};
  app.require_subcommand(1);
  app.allow_windows_style_options(false);

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a partition-wise calibrator");
  fit_cmd->add_option("--train", fa.train, "Training CSV (tree fitting)")->required();
  fit_cmd->add_option("--calib", fa.calib,
                      "Calibration CSV (defaults to the training rows)");
  fit_cmd->add_option("--out", fa.out, "Model JSON to write")->required();
  fit_cmd->add_option("--criterion", fa.criterion, "Split criterion")
      ->check(CLI::IsMember({"gini", "auc_gaussian"}));
  fit_cmd->add_option("--calibrator", fa.calibrator, "Per-leaf calibrator")
      ->check(CLI::IsMember({"platt", "isotonic", "histogram"}));
  fit_cmd->add_option("--max-depth", fa.max_depth, "Tree depth limit");
  fit_cmd->add_option("--min-samples-leaf", fa.min_samples_leaf,
                      "Minimum training rows per leaf");
  fit_cmd->add_option("--min-calib-samples", fa.min_calib_samples,
                      "Leaves with fewer calibration rows use the fallback");
  fit_cmd->add_option("--forest-size", fa.forest_size,
                      "Average this many bootstrap trees (0: single tree)");
  fit_cmd->add_option("--boosted-stages", fa.boosted_stages, "1 or 2");
  fit_cmd->add_option("--platt-ridge", fa.platt_ridge, "Platt ridge strength");
  fit_cmd->add_option("--platt-epsilon", fa.platt_epsilon,
                      "Two-point half-width of the auc_gaussian criterion");
  fit_cmd->add_option("--histogram-bins", fa.histogram_bins, "Histogram bins");
  fit_cmd->add_option("--seed", fa.seed, "Seed for all randomness");
  fit_cmd->add_option("--score-scale", fa.scale, "Scale of the score column")
      ->check(CLI::IsMember({"logit", "probability"}));

  ApplyArgs aa;
  auto* apply_cmd = app.add_subcommand("apply", "Append calibrated_prob to a CSV");
  apply_cmd->add_option("--model", aa.model, "Model JSON")->required();
  apply_cmd->add_option("--data", aa.data, "Input CSV")->required();
  apply_cmd->add_option("--out", aa.out, "Output CSV")->required();
  apply_cmd->add_option("--score-scale", aa.scale, "Scale of the score column")
      ->check(CLI::IsMember({"logit", "probability"}));

  ReportArgs ra;
  auto* report_cmd = app.add_subcommand("report", "Metrics of calibrated outputs");
  report_cmd->add_option("--data", ra.data, "CSV with predictions")->required();
  report_cmd->add_option("--out", ra.out, "Report JSON")->required();
  report_cmd->add_option("--prob-column", ra.prob_column,
                         "Column holding calibrated probabilities");
  report_cmd->add_option("--baseline-column", ra.baseline_column,
                         "Baseline probability column (default: sigmoid of score)");
  report_cmd->add_option("--score-scale", ra.scale, "Scale of the score column")
      ->check(CLI::IsMember({"logit", "probability"}));

  SynthArgs sa;
  auto* synth_cmd = app.add_subcommand("synth", "Generate toy data or the AUC sweep");
  synth_cmd->add_option("--kind", sa.kind, "heterogeneous, overconfident or sweep")
      ->check(CLI::IsMember({"heterogeneous", "overconfident", "sweep"}));
  synth_cmd->add_option("--out", sa.out, "Output CSV")->required();
  synth_cmd->add_option("--test-out", sa.test_out,
                        "Test CSV (overconfident kind)");
  synth_cmd->add_option("--n", sa.n, "Rows");
  synth_cmd->add_option("--weights", sa.weights,
                        "Score weight per heterogeneous feature")
      ->delimiter(',');
  synth_cmd->add_option("--bias", sa.bias, "Score bias");
  synth_cmd->add_option("--sigma", sa.sigma, "Base score standard deviation");
  synth_cmd->add_option("--noise-features", sa.noise_features,
                        "Uninformative uniform features");
  synth_cmd->add_option("--w-min", sa.w_min, "Sweep start");
  synth_cmd->add_option("--w-max", sa.w_max, "Sweep end");
  synth_cmd->add_option("--w-step", sa.w_step, "Sweep step");
  synth_cmd->add_option("--seed", sa.seed, "Seed");

  VerifyArgs va;
  auto* verify_cmd = app.add_subcommand("verify", "Run the oracle property suite");
  verify_cmd->add_option("--seed", va.seed, "Seed");
  verify_cmd->add_option("--trials", va.trials,
                         "Trials per property (0: defaults)");
  verify_cmd->add_option("--out", va.out, "Report JSON");
  verify_cmd->add_flag("--inject-tie-fault", va.inject_tie_fault,
                       "Self-test: count ties as full wins");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (*fit_cmd) return cmd_fit(fa, out, err);
    if (*apply_cmd) return cmd_apply(aa, out);
    if (*report_cmd) return cmd_report(ra, out);
    if (*synth_cmd) return cmd_synth(sa, out);
    if (*verify_cmd) return cmd_verify(va, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace hetcal::cli
