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

// Test-only reference oracles, deliberately independent of the library's
// implementation paths.

#pragma once

#include "mdc/rd_model.hpp"
#include "mdc/types.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace mdc::oracle {

/// Bit-at-a-time CRC-8 (poly 0x07, init 0).
inline std::uint8_t ref_crc8(std::span<const std::uint8_t> data) {
  std::uint16_t reg = 0;
  for (std::uint8_t byte : data)
    for (int bit = 7; bit >= 0; --bit) {
      const int in = (byte >> bit) & 1;
      const int top = (reg >> 7) & 1;
      reg = static_cast<std::uint16_t>((reg << 1) & 0xFF);
      if (top ^ in) reg ^= 0x07;
    }
  return static_cast<std::uint8_t>(reg);
}

/// Bit-at-a-time reflected CRC-32 (poly 0x04C11DB7, init/xorout 0xFFFFFFFF).
inline std::uint32_t ref_crc32(std::span<const std::uint8_t> data) {
  std::uint32_t reg = 0xFFFFFFFFu;
  for (std::uint8_t byte : data) {
    reg ^= byte;
    for (int k = 0; k < 8; ++k)
      reg = (reg & 1) ? (reg >> 1) ^ 0xEDB88320u : reg >> 1;
  }
  return reg ^ 0xFFFFFFFFu;
}

struct MvSearch {
  int dx = 0;
  int dy = 0;
  long sad = std::numeric_limits<long>::max();
  bool unique = true;  // no other displacement reaches the same SAD
};

/// Exhaustive full-pel SAD search over the +-range window, written directly
/// from the definition.
inline MvSearch exhaustive_best_mv(const FramePlane& frame,
                                   const FramePlane& reference,
                                   const CtuGrid& grid, int index, int range) {
  const int n = grid.ctu_size;
  const int x0 = grid.x0(index);
  const int y0 = grid.y0(index);
  MvSearch best;
  for (int dy = -range; dy <= range; ++dy)
    for (int dx = -range; dx <= range; ++dx) {
      const int x = x0 + dx;
      const int y = y0 + dy;
      if (x < 0 || y < 0 || x + n > frame.width() || y + n > frame.height())
        continue;
      long sad = 0;
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
          sad += std::abs(static_cast<int>(frame.samples(y0 + r, x0 + c)) -
                          static_cast<int>(reference.samples(y + r, x + c)));
      if (sad < best.sad) {
        best = {dx, dy, sad, true};
      } else if (sad == best.sad) {
        best.unique = false;
      }
    }
  return best;
}

/// Brute-force grid search for
///   min sum_i c_i * a_i * exp(b_i * r_i)   s.t.  sum_i r_i = target,
///   r_i in [r_min_i, r_max_i]
/// with rates discretized at `step` bits (dynamic program over the budget in
/// excess of sum r_min; exact on the grid).
inline double dp_grid_minimum(const std::vector<CtuRdModel>& models,
                              const std::vector<double>& c, double target,
                              double step = 0.01) {
  const double inf = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(models.size());

  double sum_min = 0;
  for (const CtuRdModel& m : models) sum_min += m.r_min;
  const int budget = static_cast<int>(std::llround((target - sum_min) / step));
  if (budget < 0) return inf;

  std::vector<double> dp(budget + 1, inf);
  dp[0] = 0.0;
  for (int i = 0; i < n; ++i) {
    const int span =
        static_cast<int>(std::floor((models[i].r_max - models[i].r_min) / step));
    std::vector<double> cost(span + 1);
    for (int s = 0; s <= span; ++s)
      cost[s] = c[i] * models[i].predicted(models[i].r_min + s * step);

    std::vector<double> next(budget + 1, inf);
    for (int b = 0; b <= budget; ++b) {
      if (dp[b] == inf) continue;
      const int s_max = std::min(span, budget - b);
      for (int s = 0; s <= s_max; ++s) {
        const double v = dp[b] + cost[s];
        if (v < next[b + s]) next[b + s] = v;
      }
    }
    dp.swap(next);
  }
  return dp[budget];
}

/// Projected Newton iteration for the stationarity equation
/// c*a*b*exp(b*R) + lambda = 0 on [r_min, r_max]; the numerical counterpart
/// of the closed-form root.
inline double newton_stationary_rate(const CtuRdModel& model, double c,
                                     double lambda) {
  const auto g = [&](double r) {
    return c * model.a * model.b * std::exp(model.b * r) + lambda;
  };
  // g is increasing in R (b < 0 twice); check the bounds first.
  if (g(model.r_min) >= 0.0) return model.r_min;
  if (g(model.r_max) <= 0.0) return model.r_max;

  double r = 0.5 * (model.r_min + model.r_max);
  for (int it = 0; it < 200; ++it) {
    const double value = g(r);
    const double deriv = c * model.a * model.b * model.b * std::exp(model.b * r);
    double next = r - value / deriv;
    if (!(next > model.r_min)) next = 0.5 * (r + model.r_min);
    if (!(next < model.r_max)) next = 0.5 * (r + model.r_max);
    if (std::abs(next - r) < 1e-13 * (1.0 + std::abs(r))) return next;
    r = next;
  }
  return r;
}

}  // namespace mdc::oracle
