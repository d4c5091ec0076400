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

#include "mdc/bitstream.hpp"

#include <bit>

namespace mdc {

void BitWriter::put_bit(int bit) {
  if (free_bits_ == 0) {
    bytes_.push_back(0);
    free_bits_ = 8;
  }
  if (bit) bytes_.back() |= static_cast<std::uint8_t>(1u << (free_bits_ - 1));
  --free_bits_;
  ++bit_count_;
}

void BitWriter::put_bits(std::uint64_t value, int n) {
  for (int i = n - 1; i >= 0; --i) put_bit(static_cast<int>((value >> i) & 1u));
}

void BitWriter::put_ue(std::uint64_t value) {
  const std::uint64_t code = value + 1;
  const int width = std::bit_width(code);
  for (int i = 0; i < width - 1; ++i) put_bit(0);
  put_bits(code, width);
}

void BitWriter::put_se(std::int64_t value) {
  // 0 -> 0, 1 -> 1, -1 -> 2, 2 -> 3, -2 -> 4, ...
  const std::uint64_t code =
      value > 0 ? 2 * static_cast<std::uint64_t>(value) - 1
                : 2 * static_cast<std::uint64_t>(-value);
  put_ue(code);
}

void BitWriter::align() {
  // Padding bits are already zero in the last byte; they are not counted in
  // bits().
  free_bits_ = 0;
}

int BitReader::get_bit() {
  if (byte_ >= data_.size()) throw SyntaxError("payload-overrun");
  const int bit = (data_[byte_] >> (7 - bit_)) & 1;
  if (++bit_ == 8) {
    bit_ = 0;
    ++byte_;
  }
  return bit;
}

std::uint64_t BitReader::get_bits(int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v = (v << 1) | static_cast<std::uint64_t>(get_bit());
  return v;
}

std::uint64_t BitReader::get_ue() {
  int zeros = 0;
  while (get_bit() == 0) {
    if (++zeros > 47) throw SyntaxError("golomb-malformed");
  }
  std::uint64_t code = 1;
  for (int i = 0; i < zeros; ++i)
    code = (code << 1) | static_cast<std::uint64_t>(get_bit());
  return code - 1;
}

std::int64_t BitReader::get_se() {
  const std::uint64_t code = get_ue();
  if (code & 1) return static_cast<std::int64_t>((code + 1) / 2);
  return -static_cast<std::int64_t>(code / 2);
}

void BitReader::align_checked() {
  while (bit_ != 0) {
    if (get_bit() != 0) throw SyntaxError("padding");
  }
}

}  // namespace mdc
