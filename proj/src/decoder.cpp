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

#include "mdc/decoder.hpp"

#include "mdc/codec.hpp"

#include <algorithm>
#include <ostream>

namespace mdc {

namespace {

struct DecodedCtu {
  int index = 0;
  PlaneU8 samples;
};

/// Prediction block for one CTU record, derived the same way the encoder
/// derived it. Inter prediction references the previous central picture;
/// a missing reference falls back to mid-gray. Corrupt-but-parseable motion
/// vectors are clamped into the frame so the decoder stays total.
Eigen::MatrixXd prediction_for(const CtuRecord& record, int index,
                               const DecoderConfig& config,
                               const DecoderState& state) {
  const int n = config.grid.ctu_size;
  if (record.mode == PredictionMode::IntraDc)
    return Eigen::MatrixXd::Constant(n, n, static_cast<double>(record.dc));

  if (!state.previous.has_value()) return Eigen::MatrixXd::Constant(n, n, 128.0);

  const PlaneU8& reference = state.previous->frame.samples;
  const int w = static_cast<int>(reference.cols());
  const int h = static_cast<int>(reference.rows());
  const int x = std::clamp(config.grid.x0(index) + record.mv.dx, 0, w - n);
  const int y = std::clamp(config.grid.y0(index) + record.mv.dy, 0, h - n);
  return reference.block(y, x, n, n).cast<double>();
}

void place_block(PlaneU8& plane, const CtuGrid& grid, int index,
                 const PlaneU8& block) {
  plane.block(grid.y0(index), grid.x0(index), grid.ctu_size, grid.ctu_size) =
      block;
}

}  // namespace

SidePicture decode_description(const std::vector<Packet>& delivered, int frame,
                               int desc, const DecoderConfig& config,
                               DecoderState& state) {
  const int n_ctus = config.grid.count();
  SidePicture side;
  side.samples = PlaneU8::Zero(config.grid.rows * config.grid.ctu_size,
                               config.grid.cols * config.grid.ctu_size);
  side.status.assign(n_ctus, CtuDecodeStatus::Missing);

  std::vector<bool> covered(n_ctus, false);

  int ordinal = 0;
  for (const Packet& packet : delivered) {
    const PacketView view = parse_packet(packet.wire);
    const int nalu = ordinal++;

    // Step 2: any header-level defect discards the whole NALU.
    if (!view.framing_ok) {
      state.log.push_back({frame, desc, nalu, -1, "framing"});
      continue;
    }
    if (!view.header_crc_ok) {
      state.log.push_back({frame, desc, nalu, -1, "header-crc"});
      continue;
    }
    if (!view.length_ok) {
      state.log.push_back({frame, desc, nalu, -1, "length-mismatch"});
      continue;
    }
    if (view.header.frame != frame || view.header.desc != desc) {
      state.log.push_back({frame, desc, nalu, -1, "stray-nalu"});
      continue;
    }
    const int first = view.header.first_ctu;
    const int count = view.header.ctu_count;
    if (first < 0 || count < 1 || first + count > n_ctus) {
      state.log.push_back({frame, desc, nalu, first, "header-range"});
      continue;
    }
    for (int k = 0; k < count; ++k) covered[first + k] = true;

    // Step 3: CTU-by-CTU decode with syntax checks. A failure at CTU k keeps
    // the CTUs before k and discards k..end of the NALU.
    std::vector<DecodedCtu> decoded;
    bool syntax_failed = false;
    BitReader reader(view.payload);
    for (int k = 0; k < count; ++k) {
      const int index = first + k;
      try {
        const CtuRecord record =
            parse_ctu_record(reader, config.grid.ctu_size, config.qp_max);
        CodedCtu coded;
        coded.qp = record.qp;
        coded.mode = record.mode;
        coded.mv = record.mv;
        coded.dc = record.dc;
        coded.levels = record.levels;
        decoded.push_back(
            {index, reconstruct_ctu(
                        coded, prediction_for(record, index, config, state))});
      } catch (const SyntaxError& error) {
        state.log.push_back({frame, desc, nalu, index, error.what()});
        syntax_failed = true;
        break;
      }
    }

    if (!syntax_failed && !view.payload_crc_ok) {
      // The corruption parsed cleanly, so it cannot be localized; trust
      // nothing in this NALU.
      state.log.push_back({frame, desc, nalu, first, "payload-crc"});
      continue;
    }
    if (!syntax_failed && !reader.exhausted()) {
      state.log.push_back({frame, desc, nalu, first, "length-mismatch"});
      continue;
    }

    for (const DecodedCtu& ctu : decoded) {
      place_block(side.samples, config.grid, ctu.index, ctu.samples);
      side.status[ctu.index] =
          config.roles[desc][ctu.index] == CtuRole::Principal
              ? CtuDecodeStatus::DecodedPrincipal
              : CtuDecodeStatus::DecodedRedundant;
    }
  }

  // Erased packets leave coverage gaps; log one entry per contiguous gap.
  for (int i = 0; i < n_ctus; ++i) {
    if (covered[i]) continue;
    const int start = i;
    while (i + 1 < n_ctus && !covered[i + 1]) ++i;
    state.log.push_back({frame, desc, -1, start, "erased"});
  }
  return side;
}

CentralPicture merge_central(const SidePicture& side1, const SidePicture& side2,
                             const DecoderConfig& config, DecoderState& state) {
  const int n_ctus = config.grid.count();
  CentralPicture central;
  central.frame.samples.resize(side1.samples.rows(), side1.samples.cols());
  central.frame.crop_width = config.crop_width;
  central.frame.crop_height = config.crop_height;
  central.provenance.assign(n_ctus, CtuProvenance::Concealed);

  const int n = config.grid.ctu_size;
  for (int i = 0; i < n_ctus; ++i) {
    const int y = config.grid.y0(i);
    const int x = config.grid.x0(i);
    auto dst = central.frame.samples.block(y, x, n, n);

    // Step 4: principal beats redundant beats concealment.
    if (side1.status[i] == CtuDecodeStatus::DecodedPrincipal) {
      dst = side1.samples.block(y, x, n, n);
      central.provenance[i] = CtuProvenance::Desc1Principal;
    } else if (side2.status[i] == CtuDecodeStatus::DecodedPrincipal) {
      dst = side2.samples.block(y, x, n, n);
      central.provenance[i] = CtuProvenance::Desc2Principal;
    } else if (side1.status[i] == CtuDecodeStatus::DecodedRedundant) {
      dst = side1.samples.block(y, x, n, n);
      central.provenance[i] = CtuProvenance::Desc1Redundant;
    } else if (side2.status[i] == CtuDecodeStatus::DecodedRedundant) {
      dst = side2.samples.block(y, x, n, n);
      central.provenance[i] = CtuProvenance::Desc2Redundant;
    } else if (state.previous.has_value()) {
      dst = state.previous->frame.samples.block(y, x, n, n);
    } else {
      dst.setConstant(128);
    }
  }

  state.previous = central;
  ++state.frame_counter;
  return central;
}

std::vector<CentralPicture> decode_sequence(
    const std::vector<std::array<std::vector<Packet>, 2>>& per_frame,
    const DecoderConfig& config, DecoderState& state) {
  std::vector<CentralPicture> out;
  out.reserve(per_frame.size());
  for (std::size_t f = 0; f < per_frame.size(); ++f) {
    bool idr = false;
    for (int j = 0; j < 2 && !idr; ++j)
      for (const Packet& packet : per_frame[f][j]) {
        const PacketView view = parse_packet(packet.wire);
        if (view.framing_ok && view.header_crc_ok &&
            view.header.type == NaluType::Idr) {
          idr = true;
          break;
        }
      }
    if (idr) state.previous.reset();

    const int frame = static_cast<int>(f);
    const SidePicture side1 =
        decode_description(per_frame[f][0], frame, 0, config, state);
    const SidePicture side2 =
        decode_description(per_frame[f][1], frame, 1, config, state);
    out.push_back(merge_central(side1, side2, config, state));
  }
  return out;
}

void write_error_log_csv(std::ostream& out, const std::vector<DecodeError>& log) {
  out << "frame,desc,nalu,first_ctu,cause\n";
  for (const DecodeError& e : log)
    out << e.frame << "," << (e.desc + 1) << "," << e.nalu << "," << e.first_ctu
        << "," << e.cause << "\n";
}

}  // namespace mdc
