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

namespace poisonrec {

// Inverse of the regularised rater Gram matrix
//   A = sum_i U_i U_i^T + lambda I
// for the users who rated one item. A is symmetric positive definite for any
// lambda > 0, so the inverse is symmetric PD with strictly positive diagonal;
// the constructor enforces this.
class GramInverse {
 public:
  GramInverse(Eigen::MatrixXd inverse, double lambda, int rater_count);

  const Eigen::MatrixXd& matrix() const { return inverse_; }
  double lambda() const { return lambda_; }
  int rater_count() const { return rater_count_; }
  int dim() const { return static_cast<int>(inverse_.rows()); }

 private:
  Eigen::MatrixXd inverse_;
  double lambda_;
  int rater_count_;
};

// Exact inverse of (F F^T + lambda I) for rater factor columns F (d x n).
// n = 0 is fine: the result is I / lambda.
GramInverse gram_inverse(const Eigen::MatrixXd& rater_factors, double lambda);

// Rank-1 rater addition: (A + u u^T)^-1 via the Sherman-Morrison formula.
// Every diagonal entry of the result is <= the corresponding input diagonal.
GramInverse sherman_morrison_rank1(const GramInverse& gram, const Eigen::VectorXd& u);

// Block update of an item vector after m fake raters with factor columns X
// (d x m) and ratings y (m) enter:
//   v + A^-1 X (I + X^T A^-1 X)^-1 (y - X^T v)
// This equals a full re-solve over true raters plus the fake block.
Eigen::VectorXd block_update_item(const Eigen::VectorXd& item_vector, const GramInverse& gram,
                                  const Eigen::MatrixXd& fake_factors,
                                  const Eigen::VectorXd& fake_ratings);

// When every fake column equals the target-cluster weight u_t and every fake
// rating equals y_value, (I + X^T A^-1 X)^-1 (y - X^T v) has one common row
// value K = (y_value - u_t . v) / (1 + m * u_t^T A^-1 u_t), and the block
// update collapses to v + m * K * A^-1 u_t.
double block_update_gain(const GramInverse& gram, const Eigen::VectorXd& u_t, int m,
                         double y_value, const Eigen::VectorXd& item_vector);

Eigen::VectorXd block_update_item_identical(const Eigen::VectorXd& item_vector,
                                            const GramInverse& gram,
                                            const Eigen::VectorXd& u_t, int m, double y_value);

}  // namespace poisonrec
