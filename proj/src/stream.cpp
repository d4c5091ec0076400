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

#include "mdc/stream.hpp"

#include <array>
#include <fstream>
#include <ostream>

namespace mdc {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint16_t get_u16(std::span<const std::uint8_t> d, std::size_t at) {
  return static_cast<std::uint16_t>((d[at] << 8) | d[at + 1]);
}

std::uint32_t get_u32(std::span<const std::uint8_t> d, std::size_t at) {
  return (static_cast<std::uint32_t>(d[at]) << 24) |
         (static_cast<std::uint32_t>(d[at + 1]) << 16) |
         (static_cast<std::uint32_t>(d[at + 2]) << 8) |
         static_cast<std::uint32_t>(d[at + 3]);
}

const std::array<std::uint32_t, 256>& crc32_table() {
  static const std::array<std::uint32_t, 256> table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  return table;
}

std::vector<std::uint8_t> header_bytes(const NaluHeader& h) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes);
  out.push_back(kMagic0);
  out.push_back(kMagic1);
  put_u16(out, h.frame);
  out.push_back(static_cast<std::uint8_t>((h.desc & 1) |
                                          (h.type == NaluType::Idr ? 2 : 0)));
  put_u16(out, h.first_ctu);
  put_u16(out, h.ctu_count);
  put_u32(out, h.payload_len);
  return out;
}

}  // namespace

std::uint8_t crc8(std::span<const std::uint8_t> data) {
  std::uint8_t crc = 0x00;
  for (std::uint8_t byte : data) {
    crc ^= byte;
    for (int k = 0; k < 8; ++k)
      crc = (crc & 0x80) ? static_cast<std::uint8_t>((crc << 1) ^ 0x07)
                         : static_cast<std::uint8_t>(crc << 1);
  }
  return crc;
}

std::uint32_t crc32(std::span<const std::uint8_t> data) {
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::uint8_t byte : data)
    crc = crc32_table()[(crc ^ byte) & 0xFF] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

std::vector<std::uint8_t> encode_ctu_record(const CodedCtu& ctu) {
  std::vector<std::uint8_t> out;
  put_u16(out, kCtuSentinel);
  out.push_back(static_cast<std::uint8_t>(ctu.qp));
  out.push_back(static_cast<std::uint8_t>(ctu.mode));
  if (ctu.mode == PredictionMode::IntraDc) {
    out.push_back(ctu.dc);
  } else {
    out.push_back(static_cast<std::uint8_t>(ctu.mv.dx));
    out.push_back(static_cast<std::uint8_t>(ctu.mv.dy));
  }
  BitWriter writer;
  encode_levels(ctu.levels, writer);
  writer.align();
  const std::vector<std::uint8_t>& coded = writer.bytes();
  out.insert(out.end(), coded.begin(), coded.end());
  return out;
}

CtuRecord parse_ctu_record(BitReader& reader, int ctu_size, int qp_max) {
  CtuRecord record;
  if (reader.get_bits(16) != kCtuSentinel) throw SyntaxError("sentinel");
  record.qp = static_cast<int>(reader.get_bits(8));
  if (record.qp > qp_max) throw SyntaxError("bad-qp");
  const std::uint8_t mode = static_cast<std::uint8_t>(reader.get_bits(8));
  if (mode > 1) throw SyntaxError("bad-mode");
  record.mode = static_cast<PredictionMode>(mode);
  if (record.mode == PredictionMode::IntraDc) {
    record.dc = static_cast<std::uint8_t>(reader.get_bits(8));
  } else {
    record.mv.dx = static_cast<std::int8_t>(reader.get_bits(8));
    record.mv.dy = static_cast<std::int8_t>(reader.get_bits(8));
  }
  record.levels = decode_levels(reader, ctu_size);
  reader.align_checked();
  return record;
}

std::vector<Packet> packetize(const std::vector<CodedCtu>& frame_ctus,
                              int frame_index, int desc, NaluType type,
                              int ctus_per_nalu, std::uint32_t first_seq) {
  if (frame_ctus.empty()) throw std::invalid_argument("empty-ctu-list");
  if (ctus_per_nalu < 1) throw std::invalid_argument("ctus-per-nalu must be >= 1");
  if (frame_ctus.size() > 65535) throw std::invalid_argument("ctu-count-overflow");

  std::vector<Packet> packets;
  std::uint32_t seq = first_seq;
  for (std::size_t start = 0; start < frame_ctus.size();
       start += static_cast<std::size_t>(ctus_per_nalu)) {
    const std::size_t end =
        std::min(start + static_cast<std::size_t>(ctus_per_nalu), frame_ctus.size());

    Packet packet;
    packet.seq = seq++;
    packet.header.frame = static_cast<std::uint16_t>(frame_index);
    packet.header.desc = static_cast<std::uint8_t>(desc);
    packet.header.type = type;
    packet.header.first_ctu = static_cast<std::uint16_t>(frame_ctus[start].index);
    packet.header.ctu_count = static_cast<std::uint16_t>(end - start);

    std::vector<std::uint8_t> payload;
    for (std::size_t i = start; i < end; ++i) {
      const std::vector<std::uint8_t> record = encode_ctu_record(frame_ctus[i]);
      payload.insert(payload.end(), record.begin(), record.end());
    }
    packet.header.payload_len = static_cast<std::uint32_t>(payload.size());

    packet.wire.reserve(kPayloadOffset + payload.size() + 4);
    packet.wire.push_back(kPacketPrefix);
    put_u32(packet.wire, packet.seq);
    const std::vector<std::uint8_t> hdr = header_bytes(packet.header);
    packet.wire.insert(packet.wire.end(), hdr.begin(), hdr.end());
    packet.wire.push_back(crc8(hdr));
    packet.wire.insert(packet.wire.end(), payload.begin(), payload.end());
    put_u32(packet.wire, crc32(payload));
    packets.push_back(std::move(packet));
  }
  return packets;
}

PacketView parse_packet(std::span<const std::uint8_t> wire) {
  PacketView view;
  if (wire.size() < kPayloadOffset + 4) return view;
  if (wire[0] != kPacketPrefix || wire[5] != kMagic0 || wire[6] != kMagic1)
    return view;
  view.framing_ok = true;

  view.seq = get_u32(wire, 1);
  view.header.frame = get_u16(wire, 7);
  view.header.desc = wire[9] & 1;
  view.header.type = (wire[9] & 2) ? NaluType::Idr : NaluType::Inter;
  view.header.first_ctu = get_u16(wire, 10);
  view.header.ctu_count = get_u16(wire, 12);
  view.header.payload_len = get_u32(wire, 14);

  view.header_crc_ok = crc8(wire.subspan(5, kHeaderBytes)) == wire[18];
  view.length_ok =
      wire.size() == kPayloadOffset + view.header.payload_len + 4;
  if (!view.length_ok) return view;

  view.payload = wire.subspan(kPayloadOffset, view.header.payload_len);
  view.payload_crc_ok =
      crc32(view.payload) == get_u32(wire, kPayloadOffset + view.header.payload_len);
  return view;
}

std::vector<CodedCtu> depacketize(const std::vector<Packet>& packets,
                                  int ctu_size, int qp_max) {
  std::vector<CodedCtu> ctus;
  for (const Packet& packet : packets) {
    const PacketView view = parse_packet(packet.wire);
    if (!view.framing_ok || !view.length_ok || !view.header_crc_ok ||
        !view.payload_crc_ok)
      throw std::runtime_error("depacketize: corrupt packet");
    BitReader reader(view.payload);
    for (int k = 0; k < view.header.ctu_count; ++k) {
      const CtuRecord record = parse_ctu_record(reader, ctu_size, qp_max);
      CodedCtu ctu;
      ctu.index = view.header.first_ctu + k;
      ctu.qp = record.qp;
      ctu.mode = record.mode;
      ctu.mv = record.mv;
      ctu.dc = record.dc;
      ctu.levels = record.levels;
      BitWriter writer;
      ctu.bits = encode_levels(ctu.levels, writer);
      ctus.push_back(std::move(ctu));
    }
    if (!reader.exhausted())
      throw std::runtime_error("depacketize: trailing payload bytes");
  }
  return ctus;
}

TransmitResult transmit(const std::vector<Packet>& packets, double pe,
                        std::uint64_t seed, ChannelMode mode) {
  if (pe < 0.0 || pe > 1.0) throw std::invalid_argument("p_e outside [0, 1]");

  TransmitResult result;
  result.trace.seed = seed;
  result.trace.pe = pe;
  result.trace.mode = mode;
  SplitMix64 rng(seed);

  for (const Packet& packet : packets) {
    ChannelTrace::Decision decision;
    decision.seq = packet.seq;
    decision.frame = packet.header.frame;
    decision.desc = packet.header.desc;

    if (mode == ChannelMode::Erasure) {
      decision.erased = rng.next_double() < pe;
      if (!decision.erased) result.delivered.push_back(packet);
    } else {
      Packet copy = packet;
      for (std::uint32_t off = 0; off < packet.header.payload_len; ++off)
        if (rng.next_double() < pe) {
          copy.wire[kPayloadOffset + off] ^= 0xFF;
          decision.corrupted.push_back(off);
        }
      result.delivered.push_back(std::move(copy));
    }
    result.trace.decisions.push_back(std::move(decision));
  }
  return result;
}

TransmitResult transmit_with_pattern(const std::vector<Packet>& packets,
                                     const std::vector<bool>& pattern,
                                     std::size_t& cursor) {
  if (pattern.empty()) throw std::invalid_argument("empty loss pattern");

  TransmitResult result;
  result.trace.mode = ChannelMode::Erasure;
  for (const Packet& packet : packets) {
    ChannelTrace::Decision decision;
    decision.seq = packet.seq;
    decision.frame = packet.header.frame;
    decision.desc = packet.header.desc;
    decision.erased = pattern[cursor % pattern.size()];
    ++cursor;
    if (!decision.erased) result.delivered.push_back(packet);
    result.trace.decisions.push_back(std::move(decision));
  }
  return result;
}

std::vector<Packet> replay(const std::vector<Packet>& packets,
                           const ChannelTrace& trace) {
  std::vector<Packet> delivered;
  for (const Packet& packet : packets) {
    const ChannelTrace::Decision* decision = nullptr;
    for (const ChannelTrace::Decision& d : trace.decisions)
      if (d.seq == packet.seq) {
        decision = &d;
        break;
      }
    if (decision == nullptr || decision->erased) continue;
    Packet copy = packet;
    for (std::uint32_t off : decision->corrupted)
      copy.wire[kPayloadOffset + off] ^= 0xFF;
    delivered.push_back(std::move(copy));
  }
  return delivered;
}

double feedback_pe(const std::vector<ChannelTrace>& history, int window,
                   double configured_pe) {
  if (window < 1) throw std::invalid_argument("feedback window must be >= 1");

  int seen = 0;
  int lost = 0;
  for (auto trace = history.rbegin(); trace != history.rend() && seen < window;
       ++trace) {
    for (auto d = trace->decisions.rbegin();
         d != trace->decisions.rend() && seen < window; ++d) {
      ++seen;
      if (d->erased) ++lost;
    }
  }
  if (seen == 0) return configured_pe;
  return static_cast<double>(lost) / static_cast<double>(seen);
}

std::vector<bool> load_loss_pattern(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("unreadable-file: " + path);
  std::vector<bool> pattern;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const char c = line[0];
    if (c == '0')
      pattern.push_back(false);
    else if (c == '1')
      pattern.push_back(true);
    else
      throw std::runtime_error("pattern-parse: expected 0 or 1, got '" + line +
                               "'");
  }
  if (pattern.empty()) throw std::runtime_error("pattern-parse: empty file");
  return pattern;
}

void write_trace_csv(std::ostream& out, const std::vector<ChannelTrace>& traces) {
  out << "seq,desc,frame,erased\n";
  for (const ChannelTrace& trace : traces)
    for (const ChannelTrace::Decision& d : trace.decisions)
      out << d.seq << "," << (d.desc + 1) << "," << d.frame << ","
          << (d.erased ? 1 : 0) << "\n";
}

}  // namespace mdc
