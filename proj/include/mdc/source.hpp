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

#include <iosfwd>
#include <string>
#include <vector>

namespace mdc {

enum class SourceKind { RawFile, Gradient, Noise, MovingBox };

/// Description of an input sequence. Synthetic kinds are pure functions of
/// (kind, dimensions, seed, frame index) and therefore bit-reproducible.
struct SequenceSource {
  SourceKind kind = SourceKind::MovingBox;
  int width = 64;
  int height = 64;
  int frame_count = 30;
  std::uint64_t seed = 7;
  std::string path;  // raw-file kind only
};

/// Wraps samples into a FramePlane, padding to a ctu_size multiple by edge
/// replication. The crop metadata keeps the original dimensions.
FramePlane make_frame(const PlaneU8& samples, int ctu_size);

/// Reads the Y planes of a headerless planar 4:2:0 8-bit file; chroma bytes
/// are skipped. Throws: zero-dimension, unreadable-file, file-too-short.
std::vector<FramePlane> load_raw_sequence(const std::string& path, int width,
                                          int height, int count, int ctu_size);

std::vector<FramePlane> generate_synthetic(const SequenceSource& source,
                                           int ctu_size);

std::vector<FramePlane> load_source(const SequenceSource& source, int ctu_size);

void write_pgm(const FramePlane& frame, const std::string& path);
void append_raw(const FramePlane& frame, std::ostream& out);

/// Geometry of the moving-box generator, exposed so tests can locate the box.
struct MovingBoxLayout {
  int box_size = 24;
  int start_x = 4;
  int start_y = 12;
  int dx = 2;
  int dy = 0;

  int box_x(int frame, int width) const;  // wraps modulo the frame width
};

}  // namespace mdc
