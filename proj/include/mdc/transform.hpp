/*
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
you may obtain a copy of the License at

                http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include <Eigen/Dense>

namespace mdc {

/// Orthonormal DCT-II basis of size n, cached per size.
const Eigen::MatrixXd& dct_matrix(int n);

/// 2-D separable DCT-II of a square block: C * X * C^T.
template <typename Derived>
Eigen::MatrixXd forward_dct2(const Eigen::MatrixBase<Derived>& block) {
  const Eigen::MatrixXd& c = dct_matrix(static_cast<int>(block.rows()));
  return c * block.template cast<double>() * c.transpose();
}

/// Exact inverse of forward_dct2 (the basis is orthonormal): C^T * Y * C.
template <typename Derived>
Eigen::MatrixXd inverse_dct2(const Eigen::MatrixBase<Derived>& coeffs) {
  const Eigen::MatrixXd& c = dct_matrix(static_cast<int>(coeffs.rows()));
  return c.transpose() * coeffs.template cast<double>() * c;
}

}  // namespace mdc
