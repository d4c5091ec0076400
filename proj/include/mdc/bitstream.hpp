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

#include "mdc/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace mdc {

/// MSB-first bit sink with exp-Golomb helpers.
class BitWriter {
 public:
  void put_bit(int bit);
  void put_bits(std::uint64_t value, int n);  // n <= 64, MSB first
  void put_ue(std::uint64_t value);
  void put_se(std::int64_t value);
  void align();  // zero-pad to the next byte boundary

  std::uint64_t bits() const { return bit_count_; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
  int free_bits_ = 0;  // unused bits in the last byte
  std::uint64_t bit_count_ = 0;
};

/// MSB-first bit source over a byte span. Every read is bounds-checked and
/// raises SyntaxError("payload-overrun") past the end, which is exactly the
/// overrun signal the stream decoder's syntax checker relies on.
class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> data) : data_(data) {}

  int get_bit();
  std::uint64_t get_bits(int n);
  std::uint64_t get_ue();
  std::int64_t get_se();

  /// Skips to the next byte boundary; non-zero padding bits are a syntax
  /// error ("padding").
  void align_checked();

  bool exhausted() const { return byte_ == data_.size() && bit_ == 0; }
  std::size_t bytes_consumed() const { return byte_ + (bit_ != 0 ? 1 : 0); }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t byte_ = 0;
  int bit_ = 0;  // bits consumed in the current byte
};

}  // namespace mdc
