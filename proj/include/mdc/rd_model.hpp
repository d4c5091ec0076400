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

#include "mdc/codec.hpp"

#include <iosfwd>
#include <vector>

namespace mdc {

inline constexpr double kDistortionFloor = 1e-6;  // clamp before log transform
inline constexpr double kSlopeCeiling = -1e-9;    // flat-CTU slope clamp

/// One measured operating point of a CTU.
struct RdSample {
  int qp = 0;
  double rate = 0.0;        // bits
  double distortion = 0.0;  // SSE
};

/// Exponential rate-distortion model d(R) = a * exp(b * R) fitted per CTU,
/// together with the measured sweep it came from. The rate bounds are the
/// measured sweep endpoints, never extrapolated.
struct CtuRdModel {
  int index = 0;
  double a = kDistortionFloor;
  double b = kSlopeCeiling;
  std::vector<RdSample> samples;
  double r_min = 0.0;  // rate at the largest swept QP
  double r_max = 0.0;  // rate at the smallest swept QP
  bool flat = false;

  double predicted(double rate) const { return a * std::exp(b * rate); }
};

inline const std::vector<int>& default_sweep_qps() {
  static const std::vector<int> qps{22, 27, 32, 37, 42};
  return qps;
}

/// Measures (rate, distortion) for each QP on the same residual. The sweep
/// runs before description construction, so prediction is fixed.
std::vector<RdSample> sweep_ctu(const ResidualCtu& residual,
                                const std::vector<int>& qps);

/// Least-squares line through (rate, ln distortion). Degenerate inputs (all
/// rates equal, all distortions at the floor, or a non-negative slope) mark
/// the CTU flat and clamp b to kSlopeCeiling.
CtuRdModel fit_exponential(int index, const std::vector<RdSample>& samples);

/// Columns: frame,ctu,qp,bits,sse,a,b,flat
void write_rd_csv_header(std::ostream& out);
void write_rd_csv(std::ostream& out, int frame,
                  const std::vector<CtuRdModel>& models);

}  // namespace mdc
