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

#include "mdc/transform.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace mdc {

const Eigen::MatrixXd& dct_matrix(int n) {
  static std::map<int, Eigen::MatrixXd> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);

  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  if (n <= 0) throw std::invalid_argument("dct_matrix: size must be positive");

  Eigen::MatrixXd c(n, n);
  const double norm0 = std::sqrt(1.0 / n);
  const double norm = std::sqrt(2.0 / n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      c(k, j) = (k == 0 ? norm0 : norm) *
                std::cos(std::numbers::pi * (2.0 * j + 1.0) * k / (2.0 * n));
  return cache.emplace(n, std::move(c)).first->second;
}

}  // namespace mdc
