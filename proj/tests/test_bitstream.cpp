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

#include "doctest.h"

#include <vector>

using namespace mdc;

TEST_CASE("exp-golomb codes round-trip") {
  SplitMix64 rng(11);
  BitWriter writer;
  std::vector<std::uint64_t> ue_values;
  std::vector<std::int64_t> se_values;
  for (int i = 0; i < 2000; ++i) {
    const std::uint64_t u = rng.next() % 100000;
    const std::int64_t s =
        static_cast<std::int64_t>(rng.next() % 20001) - 10000;
    ue_values.push_back(u);
    se_values.push_back(s);
    writer.put_ue(u);
    writer.put_se(s);
  }
  writer.align();

  BitReader reader(writer.bytes());
  for (int i = 0; i < 2000; ++i) {
    CHECK(reader.get_ue() == ue_values[i]);
    CHECK(reader.get_se() == se_values[i]);
  }
  reader.align_checked();
  CHECK(reader.exhausted());
}

TEST_CASE("known codeword lengths") {
  BitWriter writer;
  writer.put_ue(0);
  CHECK(writer.bits() == 1);  // '1'
  writer.put_ue(1);
  CHECK(writer.bits() == 4);  // '010'
  writer.put_se(0);
  CHECK(writer.bits() == 5);  // se(0) == ue(0)
  writer.put_se(-3);          // code_num 6 -> '00111'
  CHECK(writer.bits() == 10);
}

TEST_CASE("reading past the end raises payload-overrun") {
  BitWriter writer;
  writer.put_bits(0b101, 3);
  writer.align();
  BitReader reader(writer.bytes());
  reader.get_bits(8);
  CHECK_THROWS_AS(reader.get_bit(), SyntaxError);
}

TEST_CASE("non-zero padding is a syntax error") {
  const std::vector<std::uint8_t> bytes{0b10000001};
  BitReader reader(bytes);
  reader.get_bit();
  CHECK_THROWS_AS(reader.align_checked(), SyntaxError);
}

TEST_CASE("bit counting excludes alignment padding") {
  BitWriter writer;
  writer.put_bits(0x3, 2);
  writer.align();
  CHECK(writer.bits() == 2);
  CHECK(writer.bytes().size() == 1);
}
