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

#include "poisonrec/mechanics.hpp"

#include <cmath>

#include "poisonrec/errors.hpp"

namespace poisonrec {

namespace {

int sign_of(double x, double tol) {
  if (x > tol) return 1;
  if (x < -tol) return -1;
  return 0;
}

void check_schedule(const std::vector<long long>& schedule) {
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] < 0) throw InvalidInputError("probe schedule: negative count");
    if (i > 0 && schedule[i] <= schedule[i - 1]) {
      throw InvalidInputError("probe schedule must be strictly increasing");
    }
  }
}

}  // namespace

const char* update_case_name(UpdateCase c) {
  switch (c) {
    case UpdateCase::kSameSign:
      return "1";
    case UpdateCase::kDiagDominates:
      return "2a";
    case UpdateCase::kOffDiagDominates:
      return "2b";
    case UpdateCase::kCancels:
      return "2c";
  }
  return "?";
}

UpdateCase classify_feature(double diag_term, double offdiag_sum, double tol) {
  if (std::abs(diag_term + offdiag_sum) <= tol) return UpdateCase::kCancels;
  const int sd = sign_of(diag_term, 0.0);
  const int so = sign_of(offdiag_sum, 0.0);
  if (sd != 0 && sd == so) return UpdateCase::kSameSign;
  if (std::abs(diag_term) > std::abs(offdiag_sum)) return UpdateCase::kDiagDominates;
  return UpdateCase::kOffDiagDominates;
}

FeatureUpdateBreakdown decompose_update(const GramInverse& gram, const Eigen::VectorXd& u_t,
                                        int m, double gain) {
  if (u_t.size() != gram.dim()) {
    throw InvalidInputError("decompose_update: vector length mismatch");
  }
  const Eigen::VectorXd direction = gram.matrix() * u_t;

  FeatureUpdateBreakdown out;
  out.m = m;
  out.gain = gain;
  out.features.resize(static_cast<std::size_t>(u_t.size()));
  for (Eigen::Index k = 0; k < u_t.size(); ++k) {
    FeatureUpdate& f = out.features[static_cast<std::size_t>(k)];
    f.diag_term = gram.matrix()(k, k) * u_t[k];
    f.offdiag_sum = direction[k] - f.diag_term;
    f.delta = static_cast<double>(m) * gain * direction[k];
    f.label = classify_feature(f.diag_term, f.offdiag_sum);
    if (u_t[k] != 0.0) f.gamma = f.delta / u_t[k];
  }
  return out;
}

GramInverse single_cluster_gram_inverse(double lambda, const Eigen::VectorXd& u, int n) {
  if (!(lambda > 0.0)) throw InvalidInputError("single_cluster_gram_inverse: lambda <= 0");
  if (n < 1) throw InvalidInputError("single_cluster_gram_inverse: need n >= 1 raters");
  if (u.squaredNorm() == 0.0) {
    throw InvalidInputError("single_cluster_gram_inverse: zero weight vector");
  }
  const Eigen::Index d = u.size();
  const double c = lambda / static_cast<double>(n) + u.squaredNorm();
  Eigen::MatrixXd inv =
      (Eigen::MatrixXd::Identity(d, d) - (u * u.transpose()) / c) / lambda;
  return GramInverse(std::move(inv), lambda, n);
}

GramInverse mixed_cluster_gram_inverse(double lambda, const Eigen::VectorXd& u_t, int n_target,
                                       const Eigen::VectorXd& u_other, int n_other) {
  if (u_other.size() != u_t.size()) {
    throw InvalidInputError("mixed_cluster_gram_inverse: vector length mismatch");
  }
  if (n_other < 1) throw InvalidInputError("mixed_cluster_gram_inverse: need n_other >= 1");
  const GramInverse base = single_cluster_gram_inverse(lambda, u_t, n_target);
  // (M + n uu^T)^-1 = M^-1 - M^-1 u u^T M^-1 / (1/n + u^T M^-1 u)
  const Eigen::VectorXd mu = base.matrix() * u_other;
  const double denom = 1.0 / static_cast<double>(n_other) + u_other.dot(mu);
  Eigen::MatrixXd inv = base.matrix() - (mu * mu.transpose()) / denom;
  inv = ((inv + inv.transpose()) / 2.0).eval();
  return GramInverse(std::move(inv), lambda, n_target + n_other);
}

SignStructureReport sign_structure_report(const GramInverse& gram, const Eigen::VectorXd& u_t,
                                          double zero_tol) {
  if (u_t.size() != gram.dim()) {
    throw InvalidInputError("sign_structure_report: vector length mismatch");
  }
  const Eigen::MatrixXd& a = gram.matrix();
  const Eigen::Index d = u_t.size();

  SignStructureReport report;
  report.rows.resize(static_cast<std::size_t>(d));
  for (Eigen::Index k = 0; k < d; ++k) {
    SignStructureRow& row = report.rows[static_cast<std::size_t>(k)];
    row.diag_term = a(k, k) * u_t[k];
    const int diag_sign = sign_of(row.diag_term, zero_tol);
    row.offdiag_terms.reserve(static_cast<std::size_t>(d - 1));
    for (Eigen::Index i = 0; i < d; ++i) {
      if (i == k) continue;
      const double term = a(k, i) * u_t[i];
      row.offdiag_terms.push_back(term);
      const int term_sign = sign_of(term, zero_tol);
      if (term_sign != 0 && term_sign != -diag_sign) row.uniform_opposition = false;
    }
    if (!row.uniform_opposition) report.all_rows_uniform = false;
  }
  return report;
}

SignStructureReport sign_structure_check(double lambda, const Eigen::VectorXd& u_t, int n) {
  return sign_structure_report(single_cluster_gram_inverse(lambda, u_t, n), u_t);
}

std::vector<double> convergence_probe_target(double lambda, const Eigen::VectorXd& u_t,
                                             const std::vector<long long>& n_schedule) {
  if (!(lambda > 0.0)) throw InvalidInputError("convergence probe: lambda <= 0");
  if (u_t.squaredNorm() == 0.0) throw InvalidInputError("convergence probe: zero weight vector");
  check_schedule(n_schedule);

  // Base A = lambda I, so A^-1 u_t = u_t / lambda and s = ||u_t||^2 / lambda.
  const double base_norm = u_t.norm() / lambda;
  const double s = u_t.squaredNorm() / lambda;

  std::vector<double> norms;
  norms.reserve(n_schedule.size());
  for (long long n : n_schedule) {
    if (n == 0) {
      norms.push_back(base_norm);
      continue;
    }
    const double eps = 1.0 / static_cast<double>(n);
    norms.push_back(base_norm * eps / (eps + s));
  }
  return norms;
}

std::vector<double> convergence_probe_nontarget(double lambda, const Eigen::VectorXd& u_t,
                                                const Eigen::VectorXd& u_other,
                                                const std::vector<long long>& n_schedule) {
  if (!(lambda > 0.0)) throw InvalidInputError("convergence probe: lambda <= 0");
  if (u_other.size() != u_t.size()) {
    throw InvalidInputError("convergence probe: vector length mismatch");
  }
  if (u_other.squaredNorm() == 0.0) {
    throw InvalidInputError("convergence probe: zero source vector");
  }
  check_schedule(n_schedule);

  const Eigen::VectorXd base_t = u_t / lambda;      // A^-1 u_t
  const Eigen::VectorXd base_g = u_other / lambda;  // A^-1 u_other
  const double cross = u_other.dot(base_t);         // u_g^T A^-1 u_t
  const double self = u_other.dot(base_g);          // u_g^T A^-1 u_g

  std::vector<double> norms;
  norms.reserve(n_schedule.size());
  for (long long n : n_schedule) {
    if (n == 0) {
      norms.push_back(base_t.norm());
      continue;
    }
    const double eps = 1.0 / static_cast<double>(n);
    norms.push_back((base_t - base_g * (cross / (eps + self))).norm());
  }
  return norms;
}

}  // namespace poisonrec
