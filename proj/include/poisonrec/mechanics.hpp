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

#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "poisonrec/gram.hpp"

namespace poisonrec {

// Behaviour of one item-vector feature under the block update
//   delta_k = m * K * (a_kk u_k + sum_{i != k} a_ki u_i):
//   kSameSign      - diagonal and off-diagonal parts agree in sign; the
//                    feature moves like a positive scaling of u_k.
//   kDiagDominates - signs differ but the diagonal part wins; still a
//                    scaling of u_k.
//   kOffDiagDominates - the off-diagonal sum wins; the feature moves
//                    against the sign of u_k.
//   kCancels       - the two parts cancel (within tolerance); no change.
enum class UpdateCase { kSameSign, kDiagDominates, kOffDiagDominates, kCancels };

const char* update_case_name(UpdateCase c);  // "1", "2a", "2b", "2c"

UpdateCase classify_feature(double diag_term, double offdiag_sum, double tol = 1e-9);

struct FeatureUpdate {
  double diag_term = 0.0;    // a_kk * u_k
  double offdiag_sum = 0.0;  // sum_{i != k} a_ki * u_i
  double delta = 0.0;        // m * K * (diag_term + offdiag_sum)
  UpdateCase label = UpdateCase::kCancels;
  // delta / u_k when u_k != 0: the effective per-feature scaling factor.
  std::optional<double> gamma;
};

struct FeatureUpdateBreakdown {
  std::vector<FeatureUpdate> features;
  int m = 0;
  double gain = 0.0;  // K
};

// Splits the block-update direction A^-1 u_t feature by feature into its
// diagonal and off-diagonal contributions. The deltas reconstruct the update
// exactly: delta_k = (m * K * A^-1 u_t)_k.
FeatureUpdateBreakdown decompose_update(const GramInverse& gram, const Eigen::VectorXd& u_t,
                                        int m, double gain);

// Closed-form inverse of (lambda I + n u u^T): (1/lambda)(I - u u^T / C) with
// C = lambda/n + u^T u. This is A^-1 when all n raters share the factor u.
GramInverse single_cluster_gram_inverse(double lambda, const Eigen::VectorXd& u, int n);

// A^-1 when n_target raters sit at u_t and n_other raters at u_other, built
// by a rank-1 correction of the single-cluster closed form.
GramInverse mixed_cluster_gram_inverse(double lambda, const Eigen::VectorXd& u_t, int n_target,
                                       const Eigen::VectorXd& u_other, int n_other);

struct SignStructureRow {
  double diag_term = 0.0;
  std::vector<double> offdiag_terms;
  // True when every nonzero off-diagonal term has sign opposite to the
  // diagonal term. With single-cluster ratings this holds for every row;
  // mixed-cluster ratings may break it.
  bool uniform_opposition = true;
};

struct SignStructureReport {
  std::vector<SignStructureRow> rows;
  bool all_rows_uniform = true;
};

SignStructureReport sign_structure_report(const GramInverse& gram, const Eigen::VectorXd& u_t,
                                          double zero_tol = 1e-12);

// Sign report for the single-cluster construction (lambda I + n u_t u_t^T).
SignStructureReport sign_structure_check(double lambda, const Eigen::VectorXd& u_t, int n);

// Norms of A_hat^-1 u_t after N additional target-cluster ratings land on the
// item, for each N in the schedule (base A = lambda I). The sequence is
// strictly decreasing and converges to zero.
std::vector<double> convergence_probe_target(double lambda, const Eigen::VectorXd& u_t,
                                             const std::vector<long long>& n_schedule);

// Same probe when the N ratings come from a non-target cluster with weight
// u_other; the norms need not approach zero.
std::vector<double> convergence_probe_nontarget(double lambda, const Eigen::VectorXd& u_t,
                                                const Eigen::VectorXd& u_other,
                                                const std::vector<long long>& n_schedule);

}  // namespace poisonrec
