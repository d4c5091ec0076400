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

#include "mdc/allocator.hpp"
#include "mdc/stream.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mdc {

enum class CtuDecodeStatus : std::uint8_t {
  Missing = 0,
  DecodedPrincipal = 1,
  DecodedRedundant = 2
};

/// One description's reconstruction into a zero-initialized buffer. CTUs that
/// never decoded stay zero and are marked Missing.
struct SidePicture {
  PlaneU8 samples;
  std::vector<CtuDecodeStatus> status;
};

enum class CtuProvenance : std::uint8_t {
  Desc1Principal,
  Desc2Principal,
  Desc1Redundant,
  Desc2Redundant,
  Concealed
};

struct CentralPicture {
  FramePlane frame;
  std::vector<CtuProvenance> provenance;
};

struct DecodeError {
  int frame = 0;
  int desc = 0;      // 0-based
  int nalu = -1;     // ordinal among the frame's delivered packets; -1 unknown
  int first_ctu = -1;
  std::string cause;
};

struct DecoderConfig {
  CtuGrid grid;
  int crop_width = 0;
  int crop_height = 0;
  std::array<std::vector<CtuRole>, 2> roles;  // per description, size N
  int qp_max = kQpMax;
};

/// State carried across frames: the previous merged picture (the motion
/// reference and concealment source) and the error log. IDR frames clear
/// `previous` before decoding.
struct DecoderState {
  std::optional<CentralPicture> previous;
  int frame_counter = 0;
  std::vector<DecodeError> log;
};

/// Syntax-checked decode of one (frame, description). Header failures drop
/// the whole NALU; a mid-payload failure after CTU k drops CTUs k..end of the
/// NALU and keeps everything before k. Never throws: every failure becomes a
/// missing CTU plus a log entry.
SidePicture decode_description(const std::vector<Packet>& delivered, int frame,
                               int desc, const DecoderConfig& config,
                               DecoderState& state);

/// Per-CTU merge: a decoded principal copy wins, then a decoded redundant
/// copy, then the co-located CTU of the previous central picture (mid-gray
/// when there is none). The result becomes the new previous-central.
CentralPicture merge_central(const SidePicture& side1, const SidePicture& side2,
                             const DecoderConfig& config, DecoderState& state);

/// Decodes frames in order; a frame is treated as IDR when any delivered
/// NALU with a valid header carries the IDR type bit.
std::vector<CentralPicture> decode_sequence(
    const std::vector<std::array<std::vector<Packet>, 2>>& per_frame,
    const DecoderConfig& config, DecoderState& state);

/// Columns: frame,desc,nalu,first_ctu,cause
void write_error_log_csv(std::ostream& out, const std::vector<DecodeError>& log);

}  // namespace mdc
