// Copyright 2026 the poisonrec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "poisonrec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "poisonrec/errors.hpp"

namespace poisonrec {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double relative_change(double mu_o, double mu_f, double r_max) {
  const double denom = std::abs(r_max - mu_o);
  if (denom == 0.0) {
    throw SaturatedItemError("relative_change: item already at the maximum rating");
  }
  return (mu_f - mu_o) / denom;
}

bool hit(double pred_after, double threshold) { return pred_after >= threshold; }

std::vector<double> leakage_profile(const Eigen::MatrixXd& centers_before,
                                    const Eigen::VectorXd& item_before,
                                    const Eigen::MatrixXd& centers_after,
                                    const Eigen::VectorXd& item_after, double r_max) {
  if (centers_before.cols() != centers_after.cols()) {
    throw InvalidInputError("leakage_profile: cluster count changed");
  }
  if (centers_before.rows() != item_before.size() ||
      centers_after.rows() != item_after.size()) {
    throw InvalidInputError("leakage_profile: dimension mismatch");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(centers_before.cols()));
  for (Eigen::Index g = 0; g < centers_before.cols(); ++g) {
    out.push_back(relative_change(centers_before.col(g).dot(item_before),
                                  centers_after.col(g).dot(item_after), r_max));
  }
  return out;
}

std::vector<double> leakage_profile(const FactorModel& before_model,
                                    const ClusterModel& before_clusters,
                                    const FactorModel& after_model,
                                    const ClusterModel& after_clusters, int target_item,
                                    double r_max) {
  if (target_item < 0 || target_item >= before_model.item_factors.cols() ||
      target_item >= after_model.item_factors.cols()) {
    throw InvalidInputError("leakage_profile: target item out of range");
  }
  return leakage_profile(before_clusters.centers, before_model.item_factors.col(target_item),
                         after_clusters.centers, after_model.item_factors.col(target_item),
                         r_max);
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw InvalidInputError("pearson: need two samples of equal length >= 2");
  }
  const double ma = a.mean();
  const double mb = b.mean();
  const Eigen::ArrayXd da = a.array() - ma;
  const Eigen::ArrayXd db = b.array() - mb;
  const double va = (da * da).sum();
  const double vb = (db * db).sum();
  if (va <= 0.0 || vb <= 0.0) return kNaN;
  return (da * db).sum() / std::sqrt(va * vb);
}

namespace {

std::vector<double> ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  std::vector<double> r(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) r[order[t]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw InvalidInputError("spearman: need two samples of equal length >= 2");
  }
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  return pearson(Eigen::Map<const Eigen::VectorXd>(ra.data(), static_cast<Eigen::Index>(ra.size())),
                 Eigen::Map<const Eigen::VectorXd>(rb.data(), static_cast<Eigen::Index>(rb.size())));
}

CorrDeltaSeries correlation_vs_delta(const Eigen::MatrixXd& item_factors, int target_item,
                                     const Eigen::VectorXd& center_before,
                                     const Eigen::VectorXd& center_after) {
  if (target_item < 0 || target_item >= item_factors.cols()) {
    throw InvalidInputError("correlation_vs_delta: target item out of range");
  }
  if (center_before.size() != item_factors.rows() ||
      center_after.size() != item_factors.rows()) {
    throw InvalidInputError("correlation_vs_delta: dimension mismatch");
  }
  const Eigen::VectorXd target = item_factors.col(target_item);
  const Eigen::VectorXd shift = center_after - center_before;

  CorrDeltaSeries series;
  for (Eigen::Index j = 0; j < item_factors.cols(); ++j) {
    if (j == target_item) continue;
    const double corr = pearson(item_factors.col(j), target);
    if (std::isnan(corr)) {
      series.excluded_items.push_back(static_cast<int>(j));
      continue;
    }
    series.points.push_back(
        {static_cast<int>(j), corr, shift.dot(item_factors.col(j))});
  }
  return series;
}

std::vector<SweepAggregate> aggregate_replications(const std::vector<double>& sweep_values,
                                                   const std::vector<ReplicationRecord>& reps,
                                                   int target_cluster) {
  std::vector<SweepAggregate> out;
  out.reserve(sweep_values.size());
  for (double param : sweep_values) {
    SweepAggregate agg;
    agg.param = param;

    std::vector<const ReplicationRecord*> ok;
    for (const auto& r : reps) {
      if (r.param == param && !r.failed) ok.push_back(&r);
    }
    agg.n_ok = static_cast<int>(ok.size());
    if (ok.empty()) {
      agg.mean = agg.stddev = agg.stderror = kNaN;
      agg.hit_before_rate = agg.hit_after_rate = kNaN;
      agg.entry_rate_mean = agg.spearman_mean = kNaN;
      out.push_back(std::move(agg));
      continue;
    }

    const std::size_t k = ok.front()->rel_change.size();
    const std::size_t d = ok.front()->feature_delta.size();
    agg.leakage_mean.assign(k, 0.0);
    agg.feature_delta_mean.assign(d, 0.0);

    double sum = 0.0, sumsq = 0.0;
    int hits_before = 0, hits_after = 0;
    double entry_sum = 0.0, spearman_sum = 0.0;
    for (const auto* r : ok) {
      const double x = r->rel_change[static_cast<std::size_t>(target_cluster)];
      sum += x;
      sumsq += x * x;
      hits_before += r->hit_before ? 1 : 0;
      hits_after += r->hit_after ? 1 : 0;
      entry_sum += r->entry_rate;
      spearman_sum += r->spearman_corr_delta;
      for (std::size_t g = 0; g < k; ++g) agg.leakage_mean[g] += r->rel_change[g];
      for (std::size_t f = 0; f < d; ++f) agg.feature_delta_mean[f] += r->feature_delta[f];
    }
    const double n = static_cast<double>(ok.size());
    agg.mean = sum / n;
    const double var = ok.size() > 1 ? std::max(0.0, (sumsq - sum * sum / n) / (n - 1.0)) : 0.0;
    agg.stddev = std::sqrt(var);
    agg.stderror = agg.stddev / std::sqrt(n);
    agg.hit_before_rate = hits_before / n;
    agg.hit_after_rate = hits_after / n;
    agg.entry_rate_mean = entry_sum / n;
    agg.spearman_mean = spearman_sum / n;
    for (auto& v : agg.leakage_mean) v /= n;
    for (auto& v : agg.feature_delta_mean) v /= n;
    out.push_back(std::move(agg));
  }
  return out;
}

nlohmann::json to_json(const ExperimentReport& report) {
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& r : report.replications) {
    reps.push_back(nlohmann::json{{"param", r.param},
                                  {"rep", r.rep},
                                  {"seed", r.seed},
                                  {"failed", r.failed},
                                  {"error", r.error},
                                  {"target_item", r.target_item},
                                  {"fake_count", r.fake_count},
                                  {"mu_before", r.mu_before},
                                  {"mu_after", r.mu_after},
                                  {"rel_change", r.rel_change},
                                  {"hit_before", r.hit_before},
                                  {"hit_after", r.hit_after},
                                  {"entry_rate", r.entry_rate},
                                  {"spearman_corr_delta", r.spearman_corr_delta},
                                  {"feature_delta", r.feature_delta}});
  }
  nlohmann::json aggs = nlohmann::json::array();
  for (const auto& a : report.aggregates) {
    aggs.push_back(nlohmann::json{{"param", a.param},
                                  {"n_ok", a.n_ok},
                                  {"mean", a.mean},
                                  {"stddev", a.stddev},
                                  {"stderr", a.stderror},
                                  {"leakage_mean", a.leakage_mean},
                                  {"hit_before_rate", a.hit_before_rate},
                                  {"hit_after_rate", a.hit_after_rate},
                                  {"entry_rate_mean", a.entry_rate_mean},
                                  {"spearman_mean", a.spearman_mean},
                                  {"feature_delta_mean", a.feature_delta_mean}});
  }
  return nlohmann::json{
      {"config", report.config},
      {"target_cluster", report.target_cluster},
      {"sweep_values", report.sweep_values},
      {"replications", reps},
      {"aggregates", aggs},
      {"warnings", report.warnings},
      {"target_center_mean",
       std::vector<double>(report.target_center_mean.data(),
                           report.target_center_mean.data() + report.target_center_mean.size())}};
}

}  // namespace poisonrec
