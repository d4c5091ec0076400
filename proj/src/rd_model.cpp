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

#include "mdc/rd_model.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace mdc {

std::vector<RdSample> sweep_ctu(const ResidualCtu& residual,
                                const std::vector<int>& qps) {
  if (qps.empty()) throw std::invalid_argument("empty-qp-set");
  std::vector<RdSample> samples;
  samples.reserve(qps.size());
  for (int qp : qps) {
    const CodedCtu coded = quantize_and_code(residual, QuantParams(qp));
    samples.push_back({qp, static_cast<double>(coded.bits), coded.distortion});
  }
  return samples;
}

CtuRdModel fit_exponential(int index, const std::vector<RdSample>& samples) {
  if (samples.size() < 2) throw std::invalid_argument("too-few-samples");

  CtuRdModel model;
  model.index = index;
  model.samples = samples;

  // Rate bounds come from the measured sweep endpoints: the largest QP gives
  // r_min, the smallest gives r_max.
  const auto [min_it, max_it] = std::minmax_element(
      samples.begin(), samples.end(),
      [](const RdSample& a, const RdSample& b) { return a.qp < b.qp; });
  model.r_min = max_it->rate;
  model.r_max = min_it->rate;

  const double n = static_cast<double>(samples.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  bool any_above_floor = false;
  for (const RdSample& s : samples) {
    const double d = std::max(s.distortion, kDistortionFloor);
    if (s.distortion > kDistortionFloor) any_above_floor = true;
    const double y = std::log(d);
    sx += s.rate;
    sy += y;
    sxx += s.rate * s.rate;
    sxy += s.rate * y;
  }
  const double var = sxx - sx * sx / n;

  double mean_d = 0;
  for (const RdSample& s : samples) mean_d += s.distortion;
  mean_d /= n;

  const bool degenerate = var <= 0.0 || !any_above_floor;
  double slope = 0.0;
  if (!degenerate) slope = (sxy - sx * sy / n) / var;

  if (degenerate || slope >= kSlopeCeiling) {
    model.flat = true;
    model.b = kSlopeCeiling;
    model.a = std::max(mean_d, kDistortionFloor);
  } else {
    model.flat = false;
    model.b = slope;
    model.a = std::exp((sy - slope * sx) / n);
  }
  return model;
}

void write_rd_csv_header(std::ostream& out) {
  out << "frame,ctu,qp,bits,sse,a,b,flat\n";
}

void write_rd_csv(std::ostream& out, int frame,
                  const std::vector<CtuRdModel>& models) {
  char buf[256];
  for (const CtuRdModel& m : models)
    for (const RdSample& s : m.samples) {
      std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.10g,%.10g,%.10g,%.10g,%d\n",
                    frame, m.index, s.qp, s.rate, s.distortion, m.a, m.b,
                    m.flat ? 1 : 0);
      out << buf;
    }
}

}  // namespace mdc
