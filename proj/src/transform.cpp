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

#include "hetcal/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hetcal/error.hpp"
#include "hetcal/numeric.hpp"

namespace hetcal {

// ---------------------------------------------------------------------------
// Construction

Transform Transform::platt(double a, double b) {
  return Transform(transform::Platt{a, b});
}

Transform Transform::isotonic(std::vector<double> scores,
                              std::vector<double> values) {
  if (scores.empty() || scores.size() != values.size()) {
    throw ValidationError("isotonic transform needs matching, nonempty "
                          "breakpoints and values");
  }
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (!(scores[i] > scores[i - 1]) || values[i] < values[i - 1]) {
      throw ValidationError("isotonic breakpoints must increase and values "
                            "must be non-decreasing");
    }
  }
  return Transform(transform::Isotonic{std::move(scores), std::move(values)});
}

Transform Transform::histogram(std::vector<double> edges,
                               std::vector<double> values) {
  if (values.size() != edges.size() + 1) {
    throw ValidationError("histogram needs one more value than edges");
  }
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) {
      throw ValidationError("histogram edges must be strictly increasing");
    }
  }
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ValidationError("histogram values must lie in [0,1]");
    }
  }
  return Transform(transform::Histogram{std::move(edges), std::move(values)});
}

Transform Transform::table(
    std::map<std::pair<double, std::size_t>, double> values, double missing) {
  return Transform(transform::Table{std::move(values), missing});
}

Transform Transform::per_partition(std::map<std::size_t, Transform> parts,
                                   Transform fallback) {
  return Transform(std::make_shared<const transform::PerPartition>(
      transform::PerPartition{std::move(parts), std::move(fallback)}));
}

Transform Transform::composed(Transform outer, Transform inner) {
  return Transform(std::make_shared<const transform::Composed>(
      transform::Composed{std::move(outer), std::move(inner)}));
}

const transform::PerPartition* Transform::as_per_partition() const {
  const auto* p =
      std::get_if<std::shared_ptr<const transform::PerPartition>>(&repr_);
  return p ? p->get() : nullptr;
}

const transform::Composed* Transform::as_composed() const {
  const auto* p = std::get_if<std::shared_ptr<const transform::Composed>>(&repr_);
  return p ? p->get() : nullptr;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double step_value(const std::vector<double>& breaks,
                  const std::vector<double>& values, double s) {
  const auto it = std::upper_bound(breaks.begin(), breaks.end(), s);
  if (it == breaks.begin()) return values.front();
  return values[static_cast<std::size_t>(it - breaks.begin()) - 1];
}

double bin_value(const transform::Histogram& h, double s) {
  const auto it = std::lower_bound(h.edges.begin(), h.edges.end(), s);
  return h.values[static_cast<std::size_t>(it - h.edges.begin())];
}

double table_value(const transform::Table& t, double s, PartitionId p) {
  const auto it = t.values.find({s, p.value});
  return it == t.values.end() ? t.missing : it->second;
}

}  // namespace

double Transform::apply(double score, PartitionId partition) const {
  switch (kind()) {
    case Kind::identity:
      return score;
    case Kind::platt: {
      const auto& pl = std::get<transform::Platt>(repr_);
      return sigmoid(pl.a * score + pl.b);
    }
    case Kind::isotonic: {
      const auto& iso = std::get<transform::Isotonic>(repr_);
      return step_value(iso.scores, iso.values, score);
    }
    case Kind::histogram:
      return bin_value(std::get<transform::Histogram>(repr_), score);
    case Kind::table:
      return table_value(std::get<transform::Table>(repr_), score, partition);
    case Kind::per_partition: {
      const auto& pp = *as_per_partition();
      const auto it = pp.parts.find(partition.value);
      return it == pp.parts.end() ? pp.fallback.apply(score, partition)
                                  : it->second.apply(score, partition);
    }
    case Kind::composed: {
      const auto& c = *as_composed();
      return c.outer.apply(c.inner.apply_logit(score, partition), partition);
    }
  }
  return score;
}

double Transform::apply_logit(double score, PartitionId partition) const {
  switch (kind()) {
    case Kind::identity:
      return score;
    case Kind::platt: {
      const auto& pl = std::get<transform::Platt>(repr_);
      return pl.a * score + pl.b;
    }
    case Kind::per_partition: {
      const auto& pp = *as_per_partition();
      const auto it = pp.parts.find(partition.value);
      return it == pp.parts.end() ? pp.fallback.apply_logit(score, partition)
                                  : it->second.apply_logit(score, partition);
    }
    case Kind::composed: {
      const auto& c = *as_composed();
      return c.outer.apply_logit(c.inner.apply_logit(score, partition),
                                 partition);
    }
    case Kind::isotonic:
    case Kind::histogram:
    case Kind::table:
      return logit(apply(score, partition));
  }
  return score;
}

bool Transform::outputs_probability() const {
  switch (kind()) {
    case Kind::identity:
      return false;
    case Kind::per_partition:
      return as_per_partition()->fallback.outputs_probability();
    case Kind::composed:
      return as_composed()->outer.outputs_probability();
    default:
      return true;
  }
}

// ---------------------------------------------------------------------------
// Platt scaling

namespace {

double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

void check_fit_input(std::span<const double> scores,
                     std::span<const int> labels, std::size_t min_size,
                     const char* what) {
  if (scores.size() != labels.size()) {
    throw ValidationError(std::string(what) + ": scores/labels size mismatch");
  }
  if (scores.size() < min_size) {
    throw ValidationError(std::string(what) + ": needs at least " +
                          std::to_string(min_size) + " examples");
  }
}

}  // namespace

PlattFit fit_platt_params(std::span<const double> scores,
                          std::span<const int> labels,
                          const PlattOptions& options) {
  check_fit_input(scores, labels, 2, "fit_platt");
  const double n = static_cast<double>(scores.size());
  const double ridge = options.ridge;

  auto loss = [&](double a, double b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double z = a * scores[i] + b;
      sum += softplus(z) - labels[i] * z;
    }
    return sum / n + 0.5 * ridge * (a * a + b * b);
  };

  PlattFit fit;
  double a = 0.0;
  double b = 0.0;
  double current = loss(a, b);
  for (fit.iterations = 0; fit.iterations < options.max_iterations;
       ++fit.iterations) {
    double ga = 0.0, gb = 0.0, haa = 0.0, hab = 0.0, hbb = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double s = scores[i];
      const double p = sigmoid(a * s + b);
      const double r = p - labels[i];
      const double w = p * (1.0 - p);
      ga += r * s;
      gb += r;
      haa += w * s * s;
      hab += w * s;
      hbb += w;
    }
    ga = ga / n + ridge * a;
    gb = gb / n + ridge * b;
    haa = haa / n + ridge;
    hab = hab / n;
    hbb = hbb / n + ridge;

    if (std::hypot(ga, gb) < options.gradient_tolerance) {
      fit.converged = true;
      break;
    }
    const double det = haa * hbb - hab * hab;
    double da = -(hbb * ga - hab * gb) / det;
    double db = -(haa * gb - hab * ga) / det;
    if (!std::isfinite(da) || !std::isfinite(db)) {
      da = -ga;
      db = -gb;
    }

    // Backtracking line search on the objective.
    const double slope = ga * da + gb * db;
    double step = 1.0;
    double na = a, nb = b, next = current;
    const double bound = options.parameter_bound;
    while (step > 1e-12) {
      na = std::clamp(a + step * da, -bound, bound);
      nb = std::clamp(b + step * db, -bound, bound);
      next = loss(na, nb);
      if (next <= current + 1e-4 * step * slope) break;
      step *= 0.5;
    }
    if (!(next < current) && na == a && nb == b) break;
    if (next > current) break;
    a = na;
    b = nb;
    current = next;
  }
  fit.a = a;
  fit.b = b;
  return fit;
}

Transform fit_platt(std::span<const double> scores, std::span<const int> labels,
                    const PlattOptions& options) {
  const auto fit = fit_platt_params(scores, labels, options);
  return Transform::platt(fit.a, fit.b);
}

// ---------------------------------------------------------------------------
// Isotonic regression

Transform fit_isotonic(std::span<const double> scores,
                       std::span<const int> labels) {
  check_fit_input(scores, labels, 1, "fit_isotonic");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return scores[i] < scores[j];
  });

  struct Block {
    double start;
    double sum;
    double weight;
  };
  std::vector<Block> blocks;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    Block group{s, 0.0, 0.0};
    while (k < order.size() && scores[order[k]] == s) {
      group.sum += labels[order[k]];
      group.weight += 1.0;
      ++k;
    }
    blocks.push_back(group);
    while (blocks.size() >= 2) {
      auto& prev = blocks[blocks.size() - 2];
      const auto& last = blocks.back();
      if (prev.sum * last.weight <= last.sum * prev.weight) break;
      prev.sum += last.sum;
      prev.weight += last.weight;
      blocks.pop_back();
    }
  }

  std::vector<double> breaks, values;
  for (const auto& b : blocks) {
    breaks.push_back(b.start);
    values.push_back(b.sum / b.weight);
  }
  return Transform::isotonic(std::move(breaks), std::move(values));
}

// ---------------------------------------------------------------------------
// Histogram binning

Transform fit_histogram(std::span<const double> scores,
                        std::span<const int> labels, std::size_t bins) {
  check_fit_input(scores, labels, 1, "fit_histogram");
  if (bins < 1) throw ValidationError("fit_histogram: bins must be >= 1");

  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();

  std::vector<double> edges;
  for (std::size_t k = 1; k < bins; ++k) {
    const std::size_t r = k * n / bins;
    if (r == 0 || r >= n) continue;
    const double lo = sorted[r - 1];
    const double hi = sorted[r];
    double cut = lo + 0.5 * (hi - lo);
    if (cut >= hi) cut = lo;
    if (edges.empty() || cut > edges.back()) edges.push_back(cut);
  }

  const std::size_t nbins = edges.size() + 1;
  std::vector<double> sum(nbins, 0.0), count(nbins, 0.0);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto bin = static_cast<std::size_t>(
        std::lower_bound(edges.begin(), edges.end(), scores[i]) - edges.begin());
    sum[bin] += labels[i];
    count[bin] += 1.0;
  }

  std::vector<double> values(nbins, 0.0);
  for (std::size_t k = 0; k < nbins; ++k) {
    if (count[k] > 0) {
      values[k] = sum[k] / count[k];
      continue;
    }
    // Empty bin: inherit the nearer nonempty neighbour, left on ties.
    for (std::size_t d = 1; d < nbins; ++d) {
      if (k >= d && count[k - d] > 0) {
        values[k] = sum[k - d] / count[k - d];
        break;
      }
      if (k + d < nbins && count[k + d] > 0) {
        values[k] = sum[k + d] / count[k + d];
        break;
      }
    }
  }
  return Transform::histogram(std::move(edges), std::move(values));
}

}  // namespace hetcal
