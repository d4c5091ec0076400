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

#include "mdc/source.hpp"

#include <fstream>
#include <ostream>

namespace mdc {

namespace {

std::uint64_t hash2d(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return SplitMix64(mix_seed(mix_seed(seed, a + 1), b + 1)).next();
}

constexpr std::uint64_t kBgTag = 0x6267;       // background texture stream
constexpr std::uint64_t kBoxTag = 0x626F78;    // box texture stream
constexpr std::uint64_t kTwinkleTag = 0x7477;  // per-frame sparkle stream

PlaneU8 moving_box_frame(const SequenceSource& s, int t) {
  const MovingBoxLayout layout;
  PlaneU8 plane(s.height, s.width);
  // Low-contrast textured background panning one pixel per frame (wrapping),
  // so the whole frame carries motion and previous-frame concealment is not
  // free.
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x) {
      const int u = ((x - t) % s.width + s.width) % s.width;
      plane(y, x) = static_cast<std::uint8_t>(
          48 + (hash2d(mix_seed(s.seed, kBgTag), u, y) & 31));
    }

  // Bright textured box translating (dx, dy) per frame, wrapping at the
  // edges. The texture is a function of box-local coordinates, so the box
  // content translates rigidly with it.
  const int bx = layout.box_x(t, s.width);
  const int by = (layout.start_y + t * layout.dy) % s.height;
  for (int v = 0; v < layout.box_size; ++v)
    for (int u = 0; u < layout.box_size; ++u) {
      const int x = (bx + u) % s.width;
      const int y = (by + v) % s.height;
      plane(y, x) = static_cast<std::uint8_t>(
          160 + (hash2d(mix_seed(s.seed, kBoxTag), u, v) & 63));
    }

  // Sparse per-frame twinkles keep the residual non-trivial even under a
  // perfect motion match.
  SplitMix64 rng(mix_seed(mix_seed(s.seed, kTwinkleTag), t));
  const int count = (s.width * s.height) / 64;
  for (int k = 0; k < count; ++k) {
    const int x = static_cast<int>(rng.next() % static_cast<std::uint64_t>(s.width));
    const int y = static_cast<int>(rng.next() % static_cast<std::uint64_t>(s.height));
    const int delta = 8 + static_cast<int>(rng.next() % 17);
    const bool up = (rng.next() & 1) != 0;
    const int v = plane(y, x) + (up ? delta : -delta);
    plane(y, x) = static_cast<std::uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v));
  }
  return plane;
}

PlaneU8 synthetic_frame(const SequenceSource& s, int t) {
  PlaneU8 plane(s.height, s.width);
  switch (s.kind) {
    case SourceKind::Gradient:
      for (int y = 0; y < s.height; ++y)
        for (int x = 0; x < s.width; ++x)
          plane(y, x) = static_cast<std::uint8_t>((x + y + t) & 0xFF);
      return plane;
    case SourceKind::Noise: {
      SplitMix64 rng(mix_seed(s.seed, static_cast<std::uint64_t>(t)));
      for (int y = 0; y < s.height; ++y)
        for (int x = 0; x < s.width; ++x)
          plane(y, x) = static_cast<std::uint8_t>(rng.next() & 0xFF);
      return plane;
    }
    case SourceKind::MovingBox:
      return moving_box_frame(s, t);
    case SourceKind::RawFile:
      break;
  }
  throw std::invalid_argument("synthetic generator called with raw-file kind");
}

}  // namespace

int MovingBoxLayout::box_x(int frame, int width) const {
  return (start_x + frame * dx) % width;
}

CtuGrid CtuGrid::for_plane(const FramePlane& plane, int ctu_size) {
  CtuGrid grid;
  grid.ctu_size = ctu_size;
  grid.cols = plane.width() / ctu_size;
  grid.rows = plane.height() / ctu_size;
  return grid;
}

PlaneU8 ctu_block(const FramePlane& plane, const CtuGrid& grid, int index) {
  return plane.samples.block(grid.y0(index), grid.x0(index), grid.ctu_size,
                             grid.ctu_size);
}

FramePlane make_frame(const PlaneU8& samples, int ctu_size) {
  const int h = static_cast<int>(samples.rows());
  const int w = static_cast<int>(samples.cols());
  if (w <= 0 || h <= 0) throw std::invalid_argument("zero-dimension");
  const int pw = ((w + ctu_size - 1) / ctu_size) * ctu_size;
  const int ph = ((h + ctu_size - 1) / ctu_size) * ctu_size;

  FramePlane frame;
  frame.crop_width = w;
  frame.crop_height = h;
  frame.samples.resize(ph, pw);
  frame.samples.topLeftCorner(h, w) = samples;
  // Edge replication.
  for (int x = w; x < pw; ++x) frame.samples.col(x).head(h) = samples.col(w - 1);
  for (int y = h; y < ph; ++y) frame.samples.row(y) = frame.samples.row(h - 1);
  return frame;
}

std::vector<FramePlane> load_raw_sequence(const std::string& path, int width,
                                          int height, int count, int ctu_size) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("zero-dimension");
  if (count <= 0) throw std::invalid_argument("zero-dimension: count");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("unreadable-file: " + path);

  const std::size_t luma = static_cast<std::size_t>(width) * height;
  const std::size_t chroma =
      2 * (static_cast<std::size_t>((width + 1) / 2) * ((height + 1) / 2));

  std::vector<FramePlane> frames;
  frames.reserve(count);
  std::vector<std::uint8_t> buf(luma);
  for (int f = 0; f < count; ++f) {
    if (f > 0) in.seekg(static_cast<std::streamoff>(chroma), std::ios::cur);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(luma));
    if (static_cast<std::size_t>(in.gcount()) != luma)
      throw std::runtime_error("file-too-short: " + path);
    PlaneU8 plane(height, width);
    std::copy(buf.begin(), buf.end(), plane.data());
    frames.push_back(make_frame(plane, ctu_size));
  }
  return frames;
}

std::vector<FramePlane> generate_synthetic(const SequenceSource& source,
                                           int ctu_size) {
  if (source.width <= 0 || source.height <= 0)
    throw std::invalid_argument("zero-dimension");
  std::vector<FramePlane> frames;
  frames.reserve(source.frame_count);
  for (int t = 0; t < source.frame_count; ++t)
    frames.push_back(make_frame(synthetic_frame(source, t), ctu_size));
  return frames;
}

std::vector<FramePlane> load_source(const SequenceSource& source, int ctu_size) {
  if (source.kind == SourceKind::RawFile)
    return load_raw_sequence(source.path, source.width, source.height,
                             source.frame_count, ctu_size);
  return generate_synthetic(source, ctu_size);
}

void write_pgm(const FramePlane& frame, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("io-error: cannot open " + path);
  out << "P5\n" << frame.crop_width << " " << frame.crop_height << "\n255\n";
  for (int y = 0; y < frame.crop_height; ++y)
    out.write(reinterpret_cast<const char*>(frame.samples.row(y).data()),
              frame.crop_width);
}

void append_raw(const FramePlane& frame, std::ostream& out) {
  for (int y = 0; y < frame.crop_height; ++y)
    out.write(reinterpret_cast<const char*>(frame.samples.row(y).data()),
              frame.crop_width);
}

}  // namespace mdc
