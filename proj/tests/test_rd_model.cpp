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

#include "doctest.h"
#include "mdc/source.hpp"
#include "mdc/transform.hpp"

#include <cmath>
#include <sstream>

using namespace mdc;

namespace {

ResidualCtu box_residual(int ctu_index, bool intra_only = true) {
  SequenceSource s;
  s.kind = SourceKind::MovingBox;
  s.width = 64;
  s.height = 64;
  s.frame_count = 1;
  s.seed = 7;
  const auto frames = generate_synthetic(s, 16);
  const CtuGrid grid = CtuGrid::for_plane(frames[0], 16);
  PredictConfig config;
  config.allow_inter = !intra_only;
  return predict_ctu(frames[0], nullptr, grid, ctu_index, config);
}

ResidualCtu zero_residual(int n = 16) {
  ResidualCtu residual;
  residual.source = PlaneU8::Constant(n, n, 50);
  residual.prediction = Eigen::MatrixXd::Constant(n, n, 50.0);
  residual.coefficients = Eigen::MatrixXd::Zero(n, n);
  return residual;
}

}  // namespace

TEST_CASE("sweep returns one sample per qp in order") {
  const ResidualCtu residual = box_residual(5);
  const std::vector<int> qps{22, 27, 32, 37, 42};
  const auto samples = sweep_ctu(residual, qps);
  REQUIRE(samples.size() == 5);
  for (std::size_t k = 0; k < qps.size(); ++k) CHECK(samples[k].qp == qps[k]);
  for (std::size_t k = 1; k < samples.size(); ++k)
    CHECK(samples[k].rate <= samples[k - 1].rate);
}

TEST_CASE("sweep of an all-zero residual is flat at the minimal rate") {
  const auto samples = sweep_ctu(zero_residual(), {22, 27, 32, 37, 42});
  for (const RdSample& s : samples) {
    CHECK(s.distortion == 0.0);
    CHECK(s.rate == samples[0].rate);
  }
}

TEST_CASE("empty qp set is rejected") {
  CHECK_THROWS_WITH_AS(sweep_ctu(zero_residual(), {}),
                       doctest::Contains("empty-qp-set"), std::invalid_argument);
}

TEST_CASE("exact exponential samples are recovered to 1e-6") {
  std::vector<RdSample> samples;
  const double a = 100.0, b = -0.5;
  for (int k = 1; k <= 3; ++k)
    samples.push_back({40 - 5 * k, static_cast<double>(k),
                       a * std::exp(b * static_cast<double>(k))});
  const CtuRdModel model = fit_exponential(0, samples);
  CHECK(!model.flat);
  CHECK(std::abs(model.a - a) <= 1e-6 * a);
  CHECK(std::abs(model.b - b) <= 1e-6 * std::abs(b));
}

TEST_CASE("constant distortion marks the ctu flat") {
  const std::vector<RdSample> samples{
      {40, 100.0, 50.0}, {30, 200.0, 50.0}, {20, 300.0, 50.0}};
  const CtuRdModel model = fit_exponential(3, samples);
  CHECK(model.flat);
  CHECK(model.b == kSlopeCeiling);
  CHECK(model.a == doctest::Approx(50.0));
  CHECK(model.r_min == 100.0);
  CHECK(model.r_max == 300.0);
}

TEST_CASE("noisy samples recover the generator within 5 percent") {
  const double a = 3.2e4, b = -0.021;
  SplitMix64 rng(99);
  std::vector<RdSample> samples;
  for (int k = 0; k < 5; ++k) {
    const double rate = 120.0 + 90.0 * k;
    const double noise = 1.0 + 0.02 * (rng.next_double() - 0.5);  // +-1%
    samples.push_back({42 - 5 * k, rate, a * std::exp(b * rate) * noise});
  }
  const CtuRdModel model = fit_exponential(0, samples);
  CHECK(!model.flat);
  CHECK(std::abs(model.a - a) <= 0.05 * a);
  CHECK(std::abs(model.b - b) <= 0.05 * std::abs(b));
}

TEST_CASE("fewer than two samples is an error") {
  CHECK_THROWS_WITH_AS(fit_exponential(0, {{32, 10.0, 5.0}}),
                       doctest::Contains("too-few-samples"),
                       std::invalid_argument);
}

TEST_CASE("fitted slope is always negative and bounds come from the sweep") {
  for (int index : {0, 3, 5, 9, 10, 15}) {
    const ResidualCtu residual = box_residual(index);
    const auto samples = sweep_ctu(residual, default_sweep_qps());
    const CtuRdModel model = fit_exponential(index, samples);
    CHECK(model.b < 0.0);
    CHECK(model.a > 0.0);
    CHECK(model.r_min == samples.back().rate);
    CHECK(model.r_max == samples.front().rate);
    CHECK(model.r_min <= model.r_max);
  }
}

TEST_CASE("rd csv layout") {
  const ResidualCtu residual = box_residual(0);
  const CtuRdModel model =
      fit_exponential(0, sweep_ctu(residual, {32, 42}));
  std::ostringstream out;
  write_rd_csv_header(out);
  write_rd_csv(out, 2, {model});
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "frame,ctu,qp,bits,sse,a,b,flat");
  std::getline(in, line);
  CHECK(line.substr(0, 7) == "2,0,32,");
}
