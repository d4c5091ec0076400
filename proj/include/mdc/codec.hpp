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

#include "mdc/bitstream.hpp"
#include "mdc/types.hpp"

#include <cstdint>
#include <vector>

namespace mdc {

enum class PredictionMode : std::uint8_t { IntraDc = 0, InterPrevious = 1 };

struct MotionVector {
  std::int8_t dx = 0;
  std::int8_t dy = 0;

  bool operator==(const MotionVector&) const = default;
};

struct PredictConfig {
  bool allow_inter = true;
  int search_range = 4;  // full-pel window half-width
};

/// Per-CTU prediction outcome: transform coefficients of (source - prediction)
/// plus everything needed to reproduce the prediction on either side.
struct ResidualCtu {
  int index = 0;
  PredictionMode mode = PredictionMode::IntraDc;
  MotionVector mv;
  std::uint8_t dc = 0;            // intra predictor value (transmitted)
  Eigen::MatrixXd coefficients;   // DCT of the residual
  Eigen::MatrixXd prediction;     // integer-valued predictor block
  PlaneU8 source;                 // original samples, kept for measurement
};

/// Quantized, entropy-sized CTU. `bits` is the exact length of the
/// entropy-coded coefficient payload; `distortion` is the measured SSE
/// between source and reconstruction.
struct CodedCtu {
  int index = 0;
  int qp = 0;
  PredictionMode mode = PredictionMode::IntraDc;
  MotionVector mv;
  std::uint8_t dc = 0;
  Eigen::MatrixXi levels;  // raster order
  std::int64_t bits = 0;
  double distortion = 0.0;
};

/// Chooses intra-DC or inter prediction for one CTU. Inter runs a full-pel
/// minimum-SAD search over +-search_range on the reference; the mode with the
/// smaller residual SAD wins (inter on ties). Throws missing-reference when
/// inter is requested without a reference frame.
ResidualCtu predict_ctu(const FramePlane& frame, const FramePlane* reference,
                        const CtuGrid& grid, int index,
                        const PredictConfig& config);

CodedCtu quantize_and_code(const ResidualCtu& residual, const QuantParams& qp);

/// Inverse quantize + inverse transform + prediction, clamped to [0, 255].
/// Encoder and decoder share this path, so reconstructions cannot drift.
PlaneU8 reconstruct_ctu(const CodedCtu& coded, const Eigen::MatrixXd& prediction);

/// Zigzag scan order for an n x n block, as raster indices.
const std::vector<int>& zigzag_order(int n);

/// Entropy codes a level block as (zero-run, signed exp-Golomb level) pairs
/// in zigzag order, closed by an end-of-block run. Returns the exact bit
/// count; the writer is left unaligned.
std::int64_t encode_levels(const Eigen::MatrixXi& levels, BitWriter& writer);

/// Inverse of encode_levels; throws SyntaxError on malformed input.
Eigen::MatrixXi decode_levels(BitReader& reader, int n);

double mse_cropped(const FramePlane& original, const FramePlane& decoded);

/// Luma PSNR over the crop region; zero MSE reports the 99 dB cap.
double psnr(const FramePlane& original, const FramePlane& decoded);

}  // namespace mdc
