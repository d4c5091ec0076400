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

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace mdc {

/// 8-bit luma plane storage, row-major so raw frame bytes map directly.
using PlaneU8 =
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Syntax violation raised while parsing a coded stream. The decoder catches
/// these and turns them into missing-CTU events; they never escape it.
struct SyntaxError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One 8-bit luma picture, padded to a CTU-size multiple. crop_* keep the
/// pre-padding dimensions; quality metrics use that region only.
struct FramePlane {
  PlaneU8 samples;
  int crop_width = 0;
  int crop_height = 0;

  int width() const { return static_cast<int>(samples.cols()); }
  int height() const { return static_cast<int>(samples.rows()); }
};

/// Row-major CTU enumeration over a padded plane.
struct CtuGrid {
  int ctu_size = 16;
  int cols = 0;
  int rows = 0;

  static CtuGrid for_plane(const FramePlane& plane, int ctu_size);

  int count() const { return cols * rows; }
  int col_of(int index) const { return index % cols; }
  int row_of(int index) const { return index / cols; }
  int x0(int index) const { return col_of(index) * ctu_size; }
  int y0(int index) const { return row_of(index) * ctu_size; }
};

inline constexpr int kQpMin = 0;
inline constexpr int kQpMax = 51;

/// HEVC-convention quantizer: step = 2^((qp - 4) / 6).
struct QuantParams {
  int qp = 0;
  double step = 1.0;

  static double step_for(int qp) { return std::exp2((qp - 4) / 6.0); }

  explicit QuantParams(int qp_value) : qp(qp_value), step(step_for(qp_value)) {
    if (qp_value < kQpMin || qp_value > kQpMax)
      throw std::invalid_argument("qp outside [QP_min, QP_max]");
  }
};

/// Global rounding rule: half away from zero. Fixed once so coded streams
/// and golden tests are bit-exact.
inline double round_half_away(double v) {
  return v >= 0.0 ? std::floor(v + 0.5) : std::ceil(v - 0.5);
}

inline std::uint8_t clamp_u8(double v) {
  const double r = round_half_away(v);
  if (r <= 0.0) return 0;
  if (r >= 255.0) return 255;
  return static_cast<std::uint8_t>(r);
}

/// Deterministic 64-bit generator (splitmix64). All randomness in the lab
/// flows through this so runs are bit-reproducible across platforms.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 significant bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  return SplitMix64(base ^ (salt * 0x9E3779B97F4A7C15ULL)).next();
}

PlaneU8 ctu_block(const FramePlane& plane, const CtuGrid& grid, int index);

}  // namespace mdc
