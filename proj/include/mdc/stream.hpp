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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mdc {

enum class NaluType : std::uint8_t { Inter = 0, Idr = 1 };

inline constexpr std::uint8_t kPacketPrefix = 0xAB;
inline constexpr std::uint8_t kMagic0 = 0x4D;
inline constexpr std::uint8_t kMagic1 = 0x44;
inline constexpr std::uint16_t kCtuSentinel = 0xC7C7;
inline constexpr std::size_t kHeaderBytes = 13;   // magic .. payload-length
inline constexpr std::size_t kPayloadOffset = 19; // within the packet bytes

std::uint8_t crc8(std::span<const std::uint8_t> data);   // poly 0x07
std::uint32_t crc32(std::span<const std::uint8_t> data); // reflected 0x04C11DB7

struct NaluHeader {
  std::uint16_t frame = 0;
  std::uint8_t desc = 0;  // 0 or 1
  NaluType type = NaluType::Inter;
  std::uint16_t first_ctu = 0;
  std::uint16_t ctu_count = 0;
  std::uint32_t payload_len = 0;
};

/// One NALU in one packet. `wire` is the authoritative serialized form the
/// channel acts on; the parsed fields are bookkeeping for traces and tests.
struct Packet {
  std::uint32_t seq = 0;
  NaluHeader header;
  std::vector<std::uint8_t> wire;
};

/// Serialized CTU record: sentinel, qp, mode, predictor fields, then the
/// byte-aligned entropy payload.
std::vector<std::uint8_t> encode_ctu_record(const CodedCtu& ctu);

struct CtuRecord {
  int qp = 0;
  PredictionMode mode = PredictionMode::IntraDc;
  MotionVector mv;
  std::uint8_t dc = 0;
  Eigen::MatrixXi levels;
};

/// Parses one CTU record; throws SyntaxError (sentinel, bad-qp, bad-mode,
/// payload-overrun, bad-run, level-zero, padding) on malformed input.
CtuRecord parse_ctu_record(BitReader& reader, int ctu_size, int qp_max);

/// Splits a frame's CTUs into NALUs of ctus_per_nalu and serializes one
/// packet per NALU with strictly increasing sequence numbers.
std::vector<Packet> packetize(const std::vector<CodedCtu>& frame_ctus,
                              int frame_index, int desc, NaluType type,
                              int ctus_per_nalu, std::uint32_t first_seq);

/// Structural parse of a packet's wire bytes with per-layer validity flags.
struct PacketView {
  bool framing_ok = false;     // prefix, magic, minimum length
  bool length_ok = false;      // declared payload length matches the bytes
  bool header_crc_ok = false;
  bool payload_crc_ok = false;
  std::uint32_t seq = 0;
  NaluHeader header;
  std::span<const std::uint8_t> payload;
};

PacketView parse_packet(std::span<const std::uint8_t> wire);

/// Strict inverse of packetize for error-free streams; throws on any defect.
std::vector<CodedCtu> depacketize(const std::vector<Packet>& packets,
                                  int ctu_size, int qp_max = kQpMax);

enum class ChannelMode { Erasure, BitError };

/// Seeded record of one trial's channel decisions; replaying it reproduces
/// the channel output byte for byte.
struct ChannelTrace {
  std::uint64_t seed = 0;
  double pe = 0.0;
  ChannelMode mode = ChannelMode::Erasure;

  struct Decision {
    std::uint32_t seq = 0;
    std::uint16_t frame = 0;
    std::uint8_t desc = 0;
    bool erased = false;
    std::vector<std::uint32_t> corrupted;  // payload byte offsets
  };
  std::vector<Decision> decisions;
};

struct TransmitResult {
  std::vector<Packet> delivered;
  ChannelTrace trace;
};

/// i.i.d. packet channel. Erasure mode drops packets with probability pe;
/// bit-error mode delivers every packet but XOR-corrupts payload bytes with
/// probability pe each.
TransmitResult transmit(const std::vector<Packet>& packets, double pe,
                        std::uint64_t seed, ChannelMode mode);

TransmitResult transmit_with_pattern(const std::vector<Packet>& packets,
                                     const std::vector<bool>& pattern,
                                     std::size_t& cursor);

std::vector<Packet> replay(const std::vector<Packet>& packets,
                           const ChannelTrace& trace);

/// Empirical loss fraction over the last `window` recorded packets; falls
/// back to the configured pe while there is no history (cold start).
double feedback_pe(const std::vector<ChannelTrace>& history, int window,
                   double configured_pe);

/// Newline-separated 0 (delivered) / 1 (erased).
std::vector<bool> load_loss_pattern(const std::string& path);

/// Columns: seq,desc,frame,erased
void write_trace_csv(std::ostream& out, const std::vector<ChannelTrace>& traces);

}  // namespace mdc
